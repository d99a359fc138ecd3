//! Quality triangulation of the symmetric cells.
//!
//! Both cells are invariant under the eight symmetries of the square about
//! their centre, so only the fundamental octant `0 ≤ v ≤ u` (in coordinates
//! relative to the centre) is triangulated. The boundary of the octant is
//! seeded according to a size field, triangulated by constrained Delaunay
//! refinement, and the result is reflected into the full cell. Reflection
//! makes opposite outer edges carry bit-identical vertex coordinates, which
//! is what the periodic pairing relies on.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::mesh::{signed_area, BoundaryEdge, BoundaryTag, Mesh};
use super::{AstroidSpec, MeshOptions};
use crate::error::{Error, Result};

type Pt = [f64; 2];

enum Segment {
    Line { from: Pt, to: Pt },
    Arc { centre: Pt, radius: f64, from: Pt, to: Pt },
}

/// A closed polygonal loop with the arcs it approximates.
struct SeededLoop {
    points: Vec<Pt>,
    /// `(centre, radius, chord start, chord end)` for every arc chord.
    chords: Vec<(Pt, f64, Pt, Pt)>,
}

fn lerp(p: Pt, q: Pt, t: f64) -> Pt {
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Arc-length stations on `[0, len]` following the size field, rescaled so
/// the last station lands on `len`.
fn stations(len: f64, size_at: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut s = vec![0.0];
    let mut cur = 0.0;
    while cur < len {
        let step = size_at(cur).max(1e-12);
        cur += step;
        s.push(cur);
    }
    let n = s.len() - 1;
    if n >= 2 {
        // merge a tiny trailing interval into the previous one
        let last = s[n] - s[n - 1];
        let overshoot = s[n] - len;
        if overshoot > 0.5 * last {
            s.pop();
        }
    }
    let total = *s.last().unwrap();
    s.iter().map(|x| x * len / total).collect()
}

fn seed(segments: &[Segment], size: &dyn Fn(Pt) -> f64) -> SeededLoop {
    let mut points = Vec::new();
    let mut chords = Vec::new();
    for seg in segments {
        match *seg {
            Segment::Line { from, to } => {
                let len = (to[0] - from[0]).hypot(to[1] - from[1]);
                let st = stations(len, |s| size(lerp(from, to, s / len)));
                for &s in &st[..st.len() - 1] {
                    points.push(if s == 0.0 { from } else { lerp(from, to, s / len) });
                }
            }
            Segment::Arc {
                centre,
                radius,
                from,
                to,
            } => {
                let a0 = (from[1] - centre[1]).atan2(from[0] - centre[0]);
                let mut a1 = (to[1] - centre[1]).atan2(to[0] - centre[0]);
                // always take the short way round
                if a1 - a0 > PI {
                    a1 -= 2.0 * PI;
                } else if a0 - a1 > PI {
                    a1 += 2.0 * PI;
                }
                let len = radius * (a1 - a0).abs();
                let at = |s: f64| {
                    let th = a0 + (a1 - a0) * s / len;
                    [centre[0] + radius * th.cos(), centre[1] + radius * th.sin()]
                };
                let st = stations(len, |s| size(at(s)));
                let start = points.len();
                for &s in &st[..st.len() - 1] {
                    points.push(if s == 0.0 { from } else { at(s) });
                }
                let mut arc_pts: Vec<Pt> = points[start..].to_vec();
                arc_pts.push(to);
                for w in arc_pts.windows(2) {
                    chords.push((centre, radius, w[0], w[1]));
                }
            }
        }
    }
    SeededLoop { points, chords }
}

/// Constrained Delaunay refinement of the region enclosed by `lp`.
fn triangulate(
    lp: &SeededLoop,
    interior: &[Pt],
    h: f64,
    min_angle_deg: f64,
) -> Result<(Vec<Pt>, Vec<[usize; 3]>)> {
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut handles = Vec::with_capacity(lp.points.len());
    for p in &lp.points {
        let hd = cdt
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Meshing(format!("vertex insertion failed: {e:?}")))?;
        handles.push(hd);
    }
    let n = handles.len();
    for i in 0..n {
        let (a, b) = (handles[i], handles[(i + 1) % n]);
        if a == b {
            return Err(Error::Meshing("coincident boundary vertices".into()));
        }
        if !cdt.can_add_constraint(a, b) {
            return Err(Error::Meshing("boundary constraint intersects another".into()));
        }
        cdt.add_constraint(a, b);
    }
    for p in interior {
        cdt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Meshing(format!("vertex insertion failed: {e:?}")))?;
    }
    let params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .with_angle_limit(AngleLimit::from_deg(min_angle_deg))
        .with_max_allowed_area(0.5 * 3f64.sqrt() * 0.5 * h * h)
        .with_max_additional_vertices(4_000_000);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::Meshing("Delaunay refinement ran out of vertices".into()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.into_iter().collect();

    let mut index = HashMap::new();
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, v) in face.vertices().iter().enumerate() {
            let key = v.fix().index();
            let id = *index.entry(key).or_insert_with(|| {
                let p = v.position();
                verts.push([p.x, p.y]);
                verts.len() - 1
            });
            tri[k] = id;
        }
        if signed_area(verts[tri[0]], verts[tri[1]], verts[tri[2]]) < 0.0 {
            tri.swap(1, 2);
        }
        tris.push(tri);
    }
    Ok((verts, tris))
}

/// Moves vertices created on arc chords onto their circle.
fn project_onto_arcs(verts: &mut [Pt], tris: &[[usize; 3]], chords: &[(Pt, f64, Pt, Pt)]) {
    let boundary = boundary_vertex_set(tris);
    for &v in &boundary {
        let p = verts[v];
        for &(c, r, a, b) in chords {
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
            if t <= 1e-12 || t >= 1.0 - 1e-12 {
                continue;
            }
            let cross = ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / len2.sqrt();
            if cross > 1e-12 * len2.sqrt().max(1e-300) + 1e-15 {
                continue;
            }
            let (ux, uy) = (p[0] - c[0], p[1] - c[1]);
            let rho = ux.hypot(uy);
            let moved = [c[0] + r * ux / rho, c[1] + r * uy / rho];
            // keep the move only if no incident triangle flips
            let old = verts[v];
            verts[v] = moved;
            let flipped = tris.iter().any(|t| {
                t.contains(&v) && signed_area(verts[t[0]], verts[t[1]], verts[t[2]]) <= 0.0
            });
            if flipped {
                verts[v] = old;
            }
            break;
        }
    }
}

fn edge_counts(tris: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

fn boundary_vertex_set(tris: &[[usize; 3]]) -> Vec<usize> {
    let mut out: Vec<usize> = edge_counts(tris)
        .into_iter()
        .filter(|&(_, c)| c == 1)
        .flat_map(|((a, b), _)| [a, b])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn key(p: Pt) -> (u64, u64) {
    // +0.0 and -0.0 must collide
    ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits())
}

/// Reflects an octant triangulation (local coordinates, `0 ≤ v ≤ u`) into the
/// full square and translates it to `centre`.
fn reflect_octant(verts: &[Pt], tris: &[[usize; 3]], centre: Pt) -> (Vec<Pt>, Vec<[usize; 3]>) {
    // (swap, sign_u, sign_v): p ↦ (su * p[s0], sv * p[s1])
    let maps: [(bool, f64, f64); 8] = [
        (false, 1.0, 1.0),
        (true, 1.0, 1.0),
        (false, -1.0, 1.0),
        (true, -1.0, 1.0),
        (false, 1.0, -1.0),
        (true, 1.0, -1.0),
        (false, -1.0, -1.0),
        (true, -1.0, -1.0),
    ];
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut local: Vec<Pt> = Vec::new();
    let mut out_tris = Vec::with_capacity(tris.len() * 8);
    for &(swap, su, sv) in &maps {
        let image = |p: Pt| -> Pt {
            let (x, y) = if swap { (p[1], p[0]) } else { (p[0], p[1]) };
            [su * x + 0.0, sv * y + 0.0]
        };
        let det = if swap { -su * sv } else { su * sv };
        let ids: Vec<usize> = verts
            .iter()
            .map(|&p| {
                let q = image(p);
                *index.entry(key(q)).or_insert_with(|| {
                    local.push(q);
                    local.len() - 1
                })
            })
            .collect();
        for t in tris {
            let mut nt = [ids[t[0]], ids[t[1]], ids[t[2]]];
            if det < 0.0 {
                nt.swap(1, 2);
            }
            out_tris.push(nt);
        }
    }
    let global = local
        .into_iter()
        .map(|p| [centre[0] + p[0], centre[1] + p[1]])
        .collect();
    (global, out_tris)
}

fn tag_boundary(tris: &[[usize; 3]], classify: impl Fn(usize, usize) -> BoundaryTag) -> Vec<BoundaryEdge> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let counts = edge_counts(tris);
    // keep the orientation of the owning triangle (domain on the left)
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if counts[&(a.min(b), a.max(b))] == 1 {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges
        .into_iter()
        .map(|(a, b)| BoundaryEdge {
            a,
            b,
            tag: classify(a, b),
        })
        .collect()
}

fn periodic_pairs(verts: &[Pt], half: f64) -> Vec<(usize, usize)> {
    let mut west: HashMap<u64, usize> = HashMap::new();
    let mut south: HashMap<u64, usize> = HashMap::new();
    for (i, p) in verts.iter().enumerate() {
        if p[0] == -half {
            west.insert((p[1] + 0.0).to_bits(), i);
        }
        if p[1] == -half {
            south.insert((p[0] + 0.0).to_bits(), i);
        }
    }
    let mut pairs = Vec::new();
    for (i, p) in verts.iter().enumerate() {
        if p[0] == half {
            if let Some(&j) = west.get(&(p[1] + 0.0).to_bits()) {
                pairs.push((i, j));
            }
        }
        if p[1] == half {
            if let Some(&j) = south.get(&(p[0] + 0.0).to_bits()) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn cell_from_octant(
    segments: Vec<Segment>,
    interior: &[Pt],
    size: &dyn Fn(Pt) -> f64,
    options: &MeshOptions,
) -> Result<Mesh> {
    let lp = seed(&segments, size);
    let (mut verts, tris) = triangulate(&lp, interior, options.h, options.min_angle_deg)?;
    project_onto_arcs(&mut verts, &tris, &lp.chords);
    let (verts, tris) = reflect_octant(&verts, &tris, [0.0, 0.0]);
    let classify = |a: usize, b: usize| {
        let (p, q) = (verts[a], verts[b]);
        if p[0] == PI && q[0] == PI {
            BoundaryTag::OuterEast
        } else if p[0] == -PI && q[0] == -PI {
            BoundaryTag::OuterWest
        } else if p[1] == PI && q[1] == PI {
            BoundaryTag::OuterNorth
        } else if p[1] == -PI && q[1] == -PI {
            BoundaryTag::OuterSouth
        } else {
            BoundaryTag::Obstacle
        }
    };
    let boundary_edges = tag_boundary(&tris, classify);
    let periodic_pairs = periodic_pairs(&verts, PI);
    let mesh = Mesh {
        vertices: verts,
        triangles: tris,
        boundary_edges,
        periodic_pairs,
        h: options.h,
    };
    mesh.validate()?;
    Ok(mesh)
}

pub(super) fn cell_mesh(a: f64, options: &MeshOptions) -> Result<Mesh> {
    let h = options.h;
    let eps = PI - a;
    let corner = a * FRAC_1_SQRT_2;
    let segments = vec![
        Segment::Line {
            from: [a, 0.0],
            to: [PI, 0.0],
        },
        Segment::Line {
            from: [PI, 0.0],
            to: [PI, PI],
        },
        Segment::Line {
            from: [PI, PI],
            to: [corner, corner],
        },
        Segment::Arc {
            centre: [0.0, 0.0],
            radius: a,
            from: [corner, corner],
            to: [a, 0.0],
        },
    ];
    // seed below the target so Delaunay edges between seeds stay under it
    let gap_size = 0.6 * options.refine_ratio * eps;
    let zone = eps.sqrt();
    let arc_cap = a * PI / 16.0;
    let size = move |p: Pt| -> f64 {
        let d = (p[0] - PI).hypot(p[1]);
        let mut s = h.min(gap_size + options.grading * (d - zone).max(0.0));
        if (p[0].hypot(p[1]) - a).abs() < 1e-9 {
            s = s.min(arc_cap);
        }
        s
    };
    let interior = gap_lattice(a, gap_size, zone, h);
    cell_from_octant(segments, &interior, &size, options)
}

/// Triangular lattice of spacing `size` filling the half-gap
/// `0 < v ≤ zone` (plus a small margin) between the obstacle and the east edge.
fn gap_lattice(a: f64, size: f64, zone: f64, h: f64) -> Vec<Pt> {
    if size >= h {
        return Vec::new();
    }
    let s = size;
    let dy = 0.5 * 3f64.sqrt() * s;
    let mut pts = Vec::new();
    let mut row = 1;
    loop {
        let v = row as f64 * dy;
        if v > zone + 3.0 * s {
            break;
        }
        let left = (a * a - v * v).sqrt() + 0.5 * s;
        let right = PI - 0.5 * s;
        let offset = if row % 2 == 1 { 0.5 * s } else { 0.0 };
        let mut u = right - offset;
        while u >= left {
            if v < u {
                pts.push([u, v]);
            }
            u -= s;
        }
        row += 1;
    }
    pts
}

pub(super) fn square_mesh(h: f64) -> Result<Mesh> {
    let options = MeshOptions::with_h(h);
    let segments = vec![
        Segment::Line {
            from: [0.0, 0.0],
            to: [PI, 0.0],
        },
        Segment::Line {
            from: [PI, 0.0],
            to: [PI, PI],
        },
        Segment::Line {
            from: [PI, PI],
            to: [0.0, 0.0],
        },
    ];
    cell_from_octant(segments, &[], &|_| h, &options)
}

pub(super) fn astroid_mesh(spec: &AstroidSpec) -> Result<Mesh> {
    let h = spec.mesh_size;
    let delta = spec.trim_distance;
    let tw = spec.trim_halfwidth();
    let diag = PI * (1.0 - FRAC_1_SQRT_2);
    // octant of the astroid about its centre; the east cusp sits at (π, 0)
    let segments = vec![
        Segment::Line {
            from: [0.0, 0.0],
            to: [PI - delta, 0.0],
        },
        Segment::Line {
            from: [PI - delta, 0.0],
            to: [PI - delta, tw],
        },
        Segment::Arc {
            centre: [PI, PI],
            radius: PI,
            from: [PI - delta, tw],
            to: [diag, diag],
        },
        Segment::Line {
            from: [diag, diag],
            to: [0.0, 0.0],
        },
    ];
    // local cusp width 2·h₀(d) ≈ d²/π at distance d from the tip
    let size = move |p: Pt| -> f64 {
        let d = (PI - p[0]).hypot(p[1]).max(delta);
        h.min(0.5 * d * d / PI + 0.05 * (d - 0.5).max(0.0)).max(tw)
    };
    let lp = seed(&segments, &size);
    let options = MeshOptions::with_h(h);
    let (mut verts, tris) = triangulate(&lp, &[], h, options.min_angle_deg)?;
    project_onto_arcs(&mut verts, &tris, &lp.chords);
    let centre = [PI, -PI];
    let (verts, tris) = reflect_octant(&verts, &tris, centre);
    let (west, east) = (delta, 2.0 * PI - delta);
    let (north, south) = (-delta, -2.0 * PI + delta);
    let classify = |a: usize, b: usize| {
        let (p, q) = (verts[a], verts[b]);
        let on = |x: f64, y: f64| (x - y).abs() < 1e-12;
        if on(p[0], west) && on(q[0], west) {
            BoundaryTag::TrimWest
        } else if on(p[0], east) && on(q[0], east) {
            BoundaryTag::TrimEast
        } else if on(p[1], north) && on(q[1], north) {
            BoundaryTag::TrimNorth
        } else if on(p[1], south) && on(q[1], south) {
            BoundaryTag::TrimSouth
        } else {
            BoundaryTag::Obstacle
        }
    };
    let boundary_edges = tag_boundary(&tris, classify);
    let mesh = Mesh {
        vertices: verts,
        triangles: tris,
        boundary_edges,
        periodic_pairs: Vec::new(),
        h,
    };
    mesh.validate()?;
    Ok(mesh)
}
