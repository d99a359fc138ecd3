//! Interpolation of tabulated data: monotone piecewise-cubic Hermite curves
//! in one variable and natural-neighbour interpolation of scattered samples.

use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::error::{Error, Result};

/// Monotonicity-preserving cubic Hermite interpolant (Fritsch–Carlson
/// slopes with the Fritsch–Butland harmonic mean).
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::InvalidParameter("interpolation needs matching non-empty abscissae and values".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("abscissae must be strictly increasing".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("interpolation data must be finite".into()));
        }
        let n = x.len();
        let mut d = vec![0.0; n];
        if n >= 2 {
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let s: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
            if n == 2 {
                d[0] = s[0];
                d[1] = s[0];
            } else {
                for k in 1..n - 1 {
                    if s[k - 1] * s[k] > 0.0 {
                        let w1 = 2.0 * h[k] + h[k - 1];
                        let w2 = h[k] + 2.0 * h[k - 1];
                        d[k] = (w1 + w2) / (w1 / s[k - 1] + w2 / s[k]);
                    }
                }
                d[0] = end_slope(h[0], h[1], s[0], s[1]);
                d[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
            }
        }
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        t >= lo && t <= hi
    }

    /// Value at `t`; queries outside the abscissa range are refused.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::Range(format!("{t} outside [{lo}, {hi}]")));
        }
        if self.x.len() == 1 {
            return Ok(self.y[0]);
        }
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i => (i - 1).min(self.x.len() - 2),
        };
        let h = self.x[k + 1] - self.x[k];
        let u = (t - self.x[k]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        Ok(h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1])
    }
}

/// Three-point end slope, limited to keep the end interval monotone.
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    position: Point2<f64>,
    value: f64,
}

impl HasPosition for Sample {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.position
    }
}

/// Natural-neighbour (Sibson) interpolation of scattered planar samples.
/// Queries outside the convex hull of the samples are refused.
pub struct Scattered {
    dt: DelaunayTriangulation<Sample>,
}

impl Scattered {
    pub fn new(points: &[[f64; 2]], values: &[f64]) -> Result<Self> {
        if points.len() != values.len() || points.len() < 3 {
            return Err(Error::InvalidParameter("need at least three samples with values".into()));
        }
        let mut dt = DelaunayTriangulation::<Sample>::new();
        for (p, &v) in points.iter().zip(values) {
            if !v.is_finite() {
                continue;
            }
            dt.insert(Sample {
                position: Point2::new(p[0], p[1]),
                value: v,
            })
            .map_err(|e| Error::InvalidParameter(format!("bad sample {p:?}: {e:?}")))?;
        }
        Ok(Self { dt })
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64> {
        self.dt
            .natural_neighbor()
            .interpolate(|v| v.data().value, Point2::new(x[0], x[1]))
            .ok_or_else(|| Error::Coverage(format!("{x:?} lies outside the sampled hull")))
    }

    pub fn num_samples(&self) -> usize {
        self.dt.num_vertices()
    }
}
