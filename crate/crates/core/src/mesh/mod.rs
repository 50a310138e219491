//! Conforming triangulations, refinement and element geometry.

mod geometry;
mod io;
mod refine;

use std::collections::HashMap;

pub use geometry::ElementGeometry;
pub use io::{read_mesh, write_mesh};
pub use refine::{dorfler_mark, grading_indicator, grading_indicator_with, refine_bisect, refine_red};

use crate::Error;

/// A conforming triangulation with derived edge data.
///
/// Local vertices of each element are in counterclockwise order. Local edge `j` of an
/// element is the edge opposite its local vertex `j`. Edges are stored with ascending
/// vertex indices, which fixes their global orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    coords: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    element_edges: Vec<[usize; 3]>,
    boundary_nodes: Vec<bool>,
    boundary_edges: Vec<bool>,
}

impl Triangulation {
    /// Build a triangulation and derive edges and boundary flags from the topology.
    pub fn new(coords: Vec<[f64; 2]>, elements: Vec<[usize; 3]>) -> Result<Self, Error> {
        let nn = coords.len();
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        let mut element_edges = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            if el.iter().any(|&v| v >= nn) {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
            if el[0] == el[1] || el[1] == el[2] || el[0] == el[2] {
                return Err(Error::DegenerateElement(e));
            }
            let mut ee = [0; 3];
            for (j, slot) in ee.iter_mut().enumerate() {
                let (a, b) = (el[(j + 1) % 3], el[(j + 2) % 3]);
                let key = [a.min(b), a.max(b)];
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    counts.push(0);
                    edges.len() - 1
                });
                counts[id] += 1;
                if counts[id] > 2 {
                    return Err(Error::InvalidMesh(format!("edge {key:?} has more than two elements")));
                }
                *slot = id;
            }
            element_edges.push(ee);
        }
        let boundary_edges: Vec<bool> = counts.iter().map(|&c| c == 1).collect();
        let mut boundary_nodes = vec![false; nn];
        for (s, e) in edges.iter().enumerate() {
            if boundary_edges[s] {
                boundary_nodes[e[0]] = true;
                boundary_nodes[e[1]] = true;
            }
        }
        let mesh = Triangulation { coords, elements, edges, element_edges, boundary_nodes, boundary_edges };
        for e in 0..mesh.num_elements() {
            let g = mesh.geometry(e)?;
            if g.det <= 0.0 {
                return Err(Error::InvalidMesh(format!("element {e} is not counterclockwise")));
            }
        }
        Ok(mesh)
    }

    /// The unit square split into two right isosceles triangles.
    pub fn unit_square() -> Self {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let elements = vec![[1, 2, 0], [3, 0, 2]];
        Self::new(coords, elements).expect("valid square mesh")
    }

    /// The L-shaped domain `(-1,1)^2 \ [0,1)^2` split into six right isosceles triangles.
    pub fn l_shape() -> Self {
        let coords = vec![
            [-1.0, -1.0],
            [0.0, -1.0],
            [1.0, -1.0],
            [-1.0, 0.0],
            [0.0, 0.0],
            [1.0, 0.0],
            [-1.0, 1.0],
            [0.0, 1.0],
        ];
        let elements = vec![[1, 4, 0], [3, 0, 4], [1, 2, 4], [5, 4, 2], [3, 4, 6], [7, 6, 4]];
        Self::new(coords, elements).expect("valid L-shaped mesh")
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge indices of each element; entry `j` is opposite local vertex `j`.
    pub fn element_edges(&self) -> &[[usize; 3]] {
        &self.element_edges
    }

    pub fn boundary_nodes(&self) -> &[bool] {
        &self.boundary_nodes
    }

    pub fn boundary_edges(&self) -> &[bool] {
        &self.boundary_edges
    }

    pub fn vertices(&self, e: usize) -> [[f64; 2]; 3] {
        self.elements[e].map(|v| self.coords[v])
    }

    pub fn geometry(&self, e: usize) -> Result<ElementGeometry, Error> {
        ElementGeometry::new(self, e)
    }

    /// Unit normal of a global edge: its ascending-index tangent rotated clockwise.
    pub fn edge_normal(&self, s: usize) -> [f64; 2] {
        let t = self.edge_tangent(s);
        [t[1], -t[0]]
    }

    /// Unit tangent of a global edge, pointing from the lower to the higher node index.
    pub fn edge_tangent(&self, s: usize) -> [f64; 2] {
        let [a, b] = self.edges[s];
        let (p, q) = (self.coords[a], self.coords[b]);
        let d = [q[0] - p[0], q[1] - p[1]];
        let len = d[0].hypot(d[1]);
        [d[0] / len, d[1] / len]
    }

    pub fn edge_midpoint(&self, s: usize) -> [f64; 2] {
        let [a, b] = self.edges[s];
        let (p, q) = (self.coords[a], self.coords[b]);
        [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]
    }

    pub fn area(&self, e: usize) -> f64 {
        let [p, q, r] = self.vertices(e);
        ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])) / 2.0
    }

    pub fn barycenter(&self, e: usize) -> [f64; 2] {
        let [p, q, r] = self.vertices(e);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Elements adjacent to each edge, in ascending order.
    pub fn edge_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(2); self.num_edges()];
        for (e, ee) in self.element_edges.iter().enumerate() {
            for &s in ee {
                out[s].push(e);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_topology() {
        let m = Triangulation::unit_square();
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.boundary_edges().iter().filter(|&&b| b).count(), 4);
        assert!(m.boundary_nodes().iter().all(|&b| b));
        let total: f64 = (0..2).map(|e| m.area(e)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn l_shape_topology() {
        let m = Triangulation::l_shape();
        assert_eq!(m.num_elements(), 6);
        assert_eq!(m.num_nodes(), 8);
        let total: f64 = (0..6).map(|e| m.area(e)).sum();
        assert!((total - 3.0).abs() < 1e-15);
        // Euler: V - E + F = 1 for a simply connected domain
        assert_eq!(m.num_nodes() + m.num_elements() - m.num_edges(), 1);
        assert_eq!(m.boundary_nodes().iter().filter(|&&b| !b).count(), 0);
    }

    #[test]
    fn edges_are_sorted() {
        let m = Triangulation::l_shape();
        assert!(m.edges().iter().all(|e| e[0] < e[1]));
    }

    #[test]
    fn rejects_clockwise_elements() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Triangulation::new(coords, vec![[0, 2, 1]]).is_err());
    }

    #[test]
    fn rejects_repeated_vertices() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Triangulation::new(coords, vec![[0, 0, 1]]),
            Err(Error::DegenerateElement(0))
        ));
    }
}
