//! Structured triangulation of the unit square: `n x n` squares, each cut by
//! its bottom-left to top-right diagonal into two right triangles.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{domain, Result};
use crate::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Global unit normal; fixes the sign of the RT0 degree of freedom.
    pub normal: Vec2,
    pub length: f64,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    /// Counter-clockwise.
    pub vertices: [usize; 3],
    /// Local edge `k` is opposite local vertex `k`.
    pub edges: [usize; 3],
    /// `+1` when the edge's global normal points out of this triangle.
    pub signs: [f64; 3],
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredTriMesh {
    n: usize,
    vertices: Vec<Vec2>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
}

impl StructuredTriMesh {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("mesh needs at least one square per side"));
        }
        let nf = n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let vertices: Vec<Vec2> = (0..=n)
            .flat_map(|j| (0..=n).map(move |i| [i as f64 / nf, j as f64 / nf]))
            .collect();

        // horizontal, then vertical, then diagonal edges
        let mut edges = Vec::with_capacity(3 * n * n + 2 * n);
        let mut lookup = HashMap::with_capacity(3 * n * n + 2 * n);
        let mut push_edge = |a: usize, b: usize, normal: Vec2, boundary: bool| {
            let (pa, pb) = (vertices[a], vertices[b]);
            let length = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            lookup.insert((a.min(b), a.max(b)), edges.len());
            edges.push(Edge {
                vertices: [a, b],
                normal,
                length,
                boundary,
            });
        };
        for j in 0..=n {
            for i in 0..n {
                push_edge(vid(i, j), vid(i + 1, j), [0.0, 1.0], j == 0 || j == n);
            }
        }
        for j in 0..n {
            for i in 0..=n {
                push_edge(vid(i, j), vid(i, j + 1), [1.0, 0.0], i == 0 || i == n);
            }
        }
        let diag = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..n {
            for i in 0..n {
                push_edge(vid(i, j), vid(i + 1, j + 1), [diag, -diag], false);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                for verts in [[v00, v10, v11], [v00, v11, v01]] {
                    triangles.push(make_triangle(verts, &vertices, &edges, &lookup));
                }
            }
        }

        Ok(Self {
            n,
            vertices,
            triangles,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest element diameter, `sqrt(2)/n`.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].vertices.map(|v| self.vertices[v])
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangle_vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Cartesian point for barycentric coordinates on triangle `t`.
    pub fn map_point(&self, t: usize, bary: &[f64; 3]) -> Vec2 {
        let [a, b, c] = self.triangle_vertices(t);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Barycentric coordinates of `x` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: Vec2) -> [f64; 3] {
        let [a, b, c] = self.triangle_vertices(t);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Line-oriented text dump: `vertices`, `triangles` and `edges` sections.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t.vertices[0], t.vertices[1], t.vertices[2])?;
        }
        writeln!(w, "edges {}", self.edges.len())?;
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.vertices[0], e.vertices[1], u8::from(e.boundary))?;
        }
        Ok(())
    }
}

fn make_triangle(
    verts: [usize; 3],
    vertices: &[Vec2],
    edges: &[Edge],
    lookup: &HashMap<(usize, usize), usize>,
) -> Triangle {
    let [a, b, c] = verts.map(|v| vertices[v]);
    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
    let mut local_edges = [0; 3];
    let mut signs = [0.0; 3];
    for k in 0..3 {
        let (p, q) = (verts[(k + 1) % 3], verts[(k + 2) % 3]);
        let e = lookup[&(p.min(q), p.max(q))];
        let (pp, pq) = (vertices[p], vertices[q]);
        let mid = [0.5 * (pp[0] + pq[0]), 0.5 * (pp[1] + pq[1])];
        let n = edges[e].normal;
        let outward = (mid[0] - centroid[0]) * n[0] + (mid[1] - centroid[1]) * n[1];
        local_edges[k] = e;
        signs[k] = if outward > 0.0 { 1.0 } else { -1.0 };
    }
    Triangle {
        vertices: verts,
        edges: local_edges,
        signs,
        area,
    }
}
