use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PERIOD;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryTag {
    Obstacle,
    OuterNorth,
    OuterSouth,
    OuterEast,
    OuterWest,
    TrimWest,
    TrimSouth,
    TrimEast,
    TrimNorth,
}

impl BoundaryTag {
    pub fn is_outer(self) -> bool {
        matches!(
            self,
            Self::OuterNorth | Self::OuterSouth | Self::OuterEast | Self::OuterWest
        )
    }

    pub fn is_trim(self) -> bool {
        matches!(
            self,
            Self::TrimWest | Self::TrimSouth | Self::TrimEast | Self::TrimNorth
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Obstacle => "obstacle",
            Self::OuterNorth => "outer_N",
            Self::OuterSouth => "outer_S",
            Self::OuterEast => "outer_E",
            Self::OuterWest => "outer_W",
            Self::TrimWest => "cusp_trim_W",
            Self::TrimSouth => "cusp_trim_S",
            Self::TrimEast => "cusp_trim_E",
            Self::TrimNorth => "cusp_trim_N",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "obstacle" => Self::Obstacle,
            "outer_N" => Self::OuterNorth,
            "outer_S" => Self::OuterSouth,
            "outer_E" => Self::OuterEast,
            "outer_W" => Self::OuterWest,
            "cusp_trim_W" => Self::TrimWest,
            "cusp_trim_S" => Self::TrimSouth,
            "cusp_trim_E" => Self::TrimEast,
            "cusp_trim_N" => Self::TrimNorth,
            other => return Err(Error::Parse(format!("unknown boundary tag `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// A linear triangulation with tagged boundary edges and periodic vertex
/// pairs.
///
/// Each pair `(i, j)` couples a vertex `i` on the east (north) edge with the
/// vertex `j` on the west (south) edge at offset `(-2π, 0)` (`(0, -2π)`).
/// Corner vertices therefore take part in two pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub periodic_pairs: Vec<(usize, usize)>,
    pub h: f64,
}

pub(crate) fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

const PAIR_TOL: f64 = 1e-10;

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_points(t);
        signed_area(p, q, r)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let pts = self.triangle_points(t);
            for k in 0..3 {
                let o = pts[k];
                let u = [pts[(k + 1) % 3][0] - o[0], pts[(k + 1) % 3][1] - o[1]];
                let v = [pts[(k + 2) % 3][0] - o[0], pts[(k + 2) % 3][1] - o[1]];
                let cross = (u[0] * v[1] - u[1] * v[0]).abs();
                let dot = u[0] * v[0] + u[1] * v[1];
                worst = worst.min(cross.atan2(dot).to_degrees());
            }
        }
        worst
    }

    /// Longest edge length over all triangles.
    pub fn max_edge(&self) -> f64 {
        let mut longest: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let pts = self.triangle_points(t);
            for k in 0..3 {
                let (p, q) = (pts[k], pts[(k + 1) % 3]);
                longest = longest.max((q[0] - p[0]).hypot(q[1] - p[1]));
            }
        }
        longest
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Total length of the boundary edges carrying `tag`.
    pub fn boundary_length(&self, tag: BoundaryTag) -> f64 {
        self.edges_with_tag(tag)
            .map(|e| {
                let (p, q) = (self.vertices[e.a], self.vertices[e.b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }

    /// Vertices lying on the boundary edges tagged `tag`.
    pub fn boundary_vertices(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges_with_tag(tag)
            .flat_map(|e| [e.a, e.b])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Maps every vertex to a degree of freedom, identifying periodic
    /// partners. Returns the map and the number of distinct unknowns.
    pub fn periodic_dofs(&self) -> (Vec<usize>, usize) {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for &(i, j) in &self.periodic_pairs {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                // keep the smaller index as representative for determinism
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent[hi] = lo;
            }
        }
        let mut dof = vec![usize::MAX; n];
        let mut count = 0;
        for v in 0..n {
            let r = find(&mut parent, v);
            if dof[r] == usize::MAX {
                dof[r] = count;
                count += 1;
            }
            dof[v] = dof[r];
        }
        (dof, count)
    }

    /// Checks the structural invariants: positive triangle orientation,
    /// valid indices, and a consistent periodic pairing along the outer edges.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::MeshValidation(format!("triangle {t} has an invalid index")));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::MeshValidation(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }
        for e in &self.boundary_edges {
            if e.a >= n || e.b >= n {
                return Err(Error::MeshValidation("boundary edge has an invalid index".into()));
            }
        }
        self.validate_pairing()
    }

    fn validate_pairing(&self) -> Result<()> {
        let mut east_partner: HashMap<usize, usize> = HashMap::new();
        let mut north_partner: HashMap<usize, usize> = HashMap::new();
        for &(i, j) in &self.periodic_pairs {
            let (p, q) = (self.vertices[i], self.vertices[j]);
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            let horizontal = (dx - PERIOD).abs() < PAIR_TOL && dy.abs() < PAIR_TOL;
            let vertical = (dy - PERIOD).abs() < PAIR_TOL && dx.abs() < PAIR_TOL;
            let map = if horizontal {
                &mut east_partner
            } else if vertical {
                &mut north_partner
            } else {
                return Err(Error::MeshValidation(format!(
                    "pair ({i}, {j}) is not offset by a lattice vector: ({dx}, {dy})"
                )));
            };
            if map.insert(i, j).is_some() {
                return Err(Error::MeshValidation(format!("vertex {i} is paired twice")));
            }
        }
        let check = |tag: BoundaryTag, partners: &HashMap<usize, usize>, side: &str| -> Result<()> {
            for v in self.boundary_vertices(tag) {
                if !partners.contains_key(&v) {
                    return Err(Error::MeshValidation(format!(
                        "{side} vertex {v} at {:?} has no periodic partner",
                        self.vertices[v]
                    )));
                }
            }
            Ok(())
        };
        check(BoundaryTag::OuterEast, &east_partner, "east")?;
        check(BoundaryTag::OuterNorth, &north_partner, "north")?;
        // every west/south vertex must be hit exactly once
        let west = self.boundary_vertices(BoundaryTag::OuterWest);
        let south = self.boundary_vertices(BoundaryTag::OuterSouth);
        let mut hits: HashMap<usize, usize> = HashMap::new();
        for &j in east_partner.values() {
            *hits.entry(j).or_default() += 1;
        }
        for v in west {
            if hits.get(&v) != Some(&1) {
                return Err(Error::MeshValidation(format!("west vertex {v} is not paired exactly once")));
            }
        }
        hits.clear();
        for &j in north_partner.values() {
            *hits.entry(j).or_default() += 1;
        }
        for v in south {
            if hits.get(&v) != Some(&1) {
                return Err(Error::MeshValidation(format!("south vertex {v} is not paired exactly once")));
            }
        }
        Ok(())
    }

    /// Fails if any vertex lies strictly inside the disk of radius `a`
    /// centred at `centre` (up to a relative tolerance).
    pub fn check_outside_disk(&self, centre: [f64; 2], a: f64) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            let r = (v[0] - centre[0]).hypot(v[1] - centre[1]);
            if r < a * (1.0 - 1e-12) {
                return Err(Error::MeshValidation(format!(
                    "vertex {i} at {v:?} lies inside the obstacle (r = {r}, a = {a})"
                )));
            }
        }
        Ok(())
    }

    /// Lumped nodal areas (one third of each incident triangle).
    pub fn nodal_areas(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(t) / 3.0;
            for &i in tri {
                w[i] += a;
            }
        }
        w
    }
}
