use faer::prelude::*;
use faer::Mat;
use rayon::prelude::*;

use super::{FNode, FTable, RateNode, RateTable};
use crate::eigen::TiltVector;

/// Number of table nodes used in the local fit.
const FIT_NODES: usize = 24;
const MAX_FIT_NODES: usize = 192;
const MIN_SINGULAR_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate {
    pub value: f64,
    pub argmax: [f64; 2],
    pub extrapolated: bool,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices of the points lying on the boundary of their convex hull.
fn hull_boundary(points: &[[f64; 2]]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
    });
    let mut hull: Vec<usize> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    let scale = points
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut on = vec![false; points.len()];
    if hull.len() < 3 {
        on.iter_mut().for_each(|b| *b = true);
        return on;
    }
    for (k, p) in points.iter().enumerate() {
        for e in 0..hull.len() {
            let (a, b) = (points[hull[e]], points[hull[(e + 1) % hull.len()]]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
            if (-1e-9..=1.0 + 1e-9).contains(&t) && (cross(a, b, *p) / len).abs() <= 1e-9 * scale {
                on[k] = true;
                break;
            }
        }
    }
    on
}

/// Exponents `(i, j)` of the monomials `uⁱvʲ` of total degree at most four.
const MONOMIALS: [(i32, i32); TERMS] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];
const TERMS: usize = 15;
const NEWTON_STEPS: usize = 30;

/// Quartic polynomial in `d = p − centre`, fitted to the nearest nodes by
/// weighted least squares. A quadratic fit near the origin of a polar grid
/// has to span two rings and picks up the quartic part of `f` as extra
/// curvature, so the model carries all terms up to degree four. The
/// neighbourhood is widened until the fit is well conditioned.
struct LocalModel {
    radius: f64,
    coef: [f64; TERMS],
}

fn power(x: f64, n: i32) -> f64 {
    if n < 0 {
        0.0
    } else {
        x.powi(n)
    }
}

impl LocalModel {
    fn fit(points: &[[f64; 2]], values: &[f64], centre: [f64; 2]) -> Option<Self> {
        if points.len() < TERMS {
            return None;
        }
        let mut dist: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| ((p[0] - centre[0]).hypot(p[1] - centre[1]), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut k = FIT_NODES.min(points.len());
        loop {
            let near = &dist[..k];
            let radius = near[k - 1].0;
            if radius > 0.0 {
                let weight = |dd: f64| 1.0 / (1.0 + (dd / radius).powi(2));
                let a = Mat::from_fn(k, TERMS, |r, c| {
                    let (dd, i) = near[r];
                    let u = (points[i][0] - centre[0]) / radius;
                    let v = (points[i][1] - centre[1]) / radius;
                    let (ei, ej) = MONOMIALS[c];
                    weight(dd) * power(u, ei) * power(v, ej)
                });
                let conditioned = a.singular_values().is_ok_and(|sv| {
                    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                    lo > MIN_SINGULAR_RATIO * hi
                });
                if conditioned {
                    let rhs = Mat::from_fn(k, 1, |r, _| values[near[r].1] * weight(near[r].0));
                    let sol = a.qr().solve_lstsq(&rhs);
                    let mut coef = [0.0; TERMS];
                    for (r, c) in coef.iter_mut().enumerate() {
                        *c = sol[(r, 0)];
                    }
                    return coef.iter().all(|v| v.is_finite()).then_some(Self { radius, coef });
                }
            }
            if k == points.len() || k >= MAX_FIT_NODES {
                return None;
            }
            k = (2 * k).min(points.len());
        }
    }

    /// Value, gradient and Hessian at offset `d`.
    fn eval(&self, d: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let (u, v) = (d[0] / self.radius, d[1] / self.radius);
        let (mut m, mut g, mut h) = (0.0, [0.0; 2], [[0.0; 2]; 2]);
        for (&(i, j), &c) in MONOMIALS.iter().zip(&self.coef) {
            let (fi, fj) = (i as f64, j as f64);
            m += c * power(u, i) * power(v, j);
            g[0] += c * fi * power(u, i - 1) * power(v, j);
            g[1] += c * fj * power(u, i) * power(v, j - 1);
            h[0][0] += c * fi * (fi - 1.0) * power(u, i - 2) * power(v, j);
            h[0][1] += c * fi * fj * power(u, i - 1) * power(v, j - 1);
            h[1][1] += c * fj * (fj - 1.0) * power(u, i) * power(v, j - 2);
        }
        let (r1, r2) = (self.radius, self.radius * self.radius);
        h[1][0] = h[0][1];
        (
            m,
            [g[0] / r1, g[1] / r1],
            [[h[0][0] / r2, h[0][1] / r2], [h[1][0] / r2, h[1][1] / r2]],
        )
    }

    /// Maximiser of `d·ξ − model(d)` by Newton's method from `d = 0`,
    /// provided the model stays convex and the iterate inside the fitted
    /// neighbourhood.
    fn maximise(&self, xi: [f64; 2]) -> Option<([f64; 2], f64)> {
        let mut d = [0.0; 2];
        for _ in 0..NEWTON_STEPS {
            let (_, g, h) = self.eval(d);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if !(h[0][0] > 0.0 && det > 0.0) {
                return None;
            }
            let r = [xi[0] - g[0], xi[1] - g[1]];
            let s = [
                (h[1][1] * r[0] - h[0][1] * r[1]) / det,
                (h[0][0] * r[1] - h[1][0] * r[0]) / det,
            ];
            d = [d[0] + s[0], d[1] + s[1]];
            if d[0].hypot(d[1]) > self.radius {
                return None;
            }
            if s[0].hypot(s[1]) <= 1e-13 * self.radius {
                let (m, _, _) = self.eval(d);
                return Some((d, d[0] * xi[0] + d[1] * xi[1] - m));
            }
        }
        None
    }
}

fn conjugate_one(points: &[[f64; 2]], values: &[f64], on_hull: &[bool], xi: [f64; 2]) -> Conjugate {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (p, v)) in points.iter().zip(values).enumerate() {
        let s = p[0] * xi[0] + p[1] * xi[1] - v;
        if s > best.0 {
            best = (s, i);
        }
    }
    let (discrete, k) = best;
    let pk = points[k];
    let mut out = Conjugate {
        value: discrete,
        argmax: pk,
        extrapolated: on_hull[k],
    };
    if let Some((d, gain)) = LocalModel::fit(points, values, pk).and_then(|m| m.maximise(xi)) {
        let refined = pk[0] * xi[0] + pk[1] * xi[1] + gain;
        if refined >= discrete {
            out.value = refined;
            out.argmax = [pk[0] + d[0], pk[1] + d[1]];
        }
    }
    out
}

/// Convex conjugate `sup_p (p·x − v(p))` of scattered samples at each
/// target `x`: discrete argmax refined by one Newton step on a local
/// quadratic fit. Maxima attained at a hull node are flagged.
pub fn conjugate(points: &[[f64; 2]], values: &[f64], targets: &[[f64; 2]]) -> Vec<Conjugate> {
    assert_eq!(points.len(), values.len());
    if points.is_empty() {
        return targets
            .iter()
            .map(|_| Conjugate {
                value: f64::NAN,
                argmax: [f64::NAN; 2],
                extrapolated: true,
            })
            .collect();
    }
    let on_hull = hull_boundary(points);
    targets
        .par_iter()
        .map(|&x| conjugate_one(points, values, &on_hull, x))
        .collect()
}

/// Rate function `g(ξ) = sup_p (p·ξ − f(p))` on `xi_grid`.
pub fn legendre_transform(ftable: &FTable, xi_grid: &[[f64; 2]]) -> RateTable {
    let (pts, vals) = ftable.samples();
    let nodes = conjugate(&pts, &vals, xi_grid)
        .into_iter()
        .zip(xi_grid)
        .map(|(c, &xi)| RateNode {
            xi,
            g: c.value,
            p_max: c.argmax,
            extrapolated: c.extrapolated,
        })
        .collect();
    let mut provenance = ftable.provenance.clone();
    provenance.insert("transform".into(), "legendre".into());
    RateTable::new(nodes, provenance)
}

/// `f(p) = sup_ξ (p·ξ − g(ξ))` on `p_grid`, the transform back.
pub fn legendre_inverse(rate: &RateTable, p_grid: &[TiltVector]) -> FTable {
    let (pts, vals): (Vec<_>, Vec<_>) = rate.nodes.iter().map(|n| (n.xi, n.g)).unzip();
    let targets: Vec<[f64; 2]> = p_grid.iter().map(|t| t.as_array()).collect();
    let nodes = conjugate(&pts, &vals, &targets)
        .into_iter()
        .zip(p_grid)
        .map(|(c, &t)| FNode {
            error: c.extrapolated.then(|| "maximum on table boundary".to_string()),
            ..FNode::exact(t, c.value)
        })
        .collect();
    FTable::new(nodes, rate.provenance.clone())
}
