//! Plain-text mesh exchange format.
//!
//! ```text
//! <nv> <nt> <nb> <np> <h>
//! x y          (nv lines)
//! i j k        (nt lines, 0-based, counter-clockwise)
//! i j tag      (nb lines)
//! i j          (np lines, east/north vertex first)
//! ```

use std::io::{BufRead, Write};

use super::mesh::{BoundaryEdge, Mesh};
use crate::error::{Error, Result};

impl Mesh {
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{} {} {} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len(),
            self.periodic_pairs.len(),
            self.h
        )?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "{} {} {}", e.a, e.b, e.tag)?;
        }
        for (i, j) in &self.periodic_pairs {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            loop {
                match lines.next() {
                    Some(line) => {
                        let line = line?;
                        if !line.trim().is_empty() {
                            return Ok(line);
                        }
                    }
                    None => return Err(Error::Parse(format!("unexpected end of mesh file reading {what}"))),
                }
            }
        };
        let header = next("header")?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() != 5 {
            return Err(Error::Parse(format!("bad mesh header `{header}`")));
        }
        let count = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("bad count `{s}`: {e}")));
        let (nv, nt, nb, np) = (count(tok[0])?, count(tok[1])?, count(tok[2])?, count(tok[3])?);
        let h: f64 = tok[4].parse().map_err(|e| Error::Parse(format!("bad h `{}`: {e}", tok[4])))?;

        fn fields<T: std::str::FromStr>(line: &str, n: usize) -> Result<Vec<T>>
        where
            T::Err: std::fmt::Display,
        {
            let v: Vec<T> = line
                .split_whitespace()
                .take(n)
                .map(|s| s.parse::<T>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != n {
                return Err(Error::Parse(format!("expected {n} fields in `{line}`")));
            }
            Ok(v)
        }

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let f: Vec<f64> = fields(&next("vertex")?, 2)?;
            vertices.push([f[0], f[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f: Vec<usize> = fields(&next("triangle")?, 3)?;
            triangles.push([f[0], f[1], f[2]]);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let line = next("boundary edge")?;
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(Error::Parse(format!("bad boundary edge `{line}`")));
            }
            boundary_edges.push(BoundaryEdge {
                a: count(tok[0])?,
                b: count(tok[1])?,
                tag: tok[2].parse()?,
            });
        }
        let mut periodic_pairs = Vec::with_capacity(np);
        for _ in 0..np {
            let f: Vec<usize> = fields(&next("pair")?, 2)?;
            periodic_pairs.push((f[0], f[1]));
        }
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            periodic_pairs,
            h,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}
