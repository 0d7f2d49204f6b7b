use crate::error::{Error, Result};

/// Partition `0 = x_0 < x_1 < … < x_n = 1` of the unit interval. Nodes are
/// the faces of the 1D mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::config("mesh needs at least one element"));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::config("mesh must start at 0 and end at 1"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("mesh nodes must be strictly increasing"));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::config("mesh needs at least one element"));
        }
        let mut nodes: Vec<f64> = (0..=elements).map(|i| i as f64 / elements as f64).collect();
        nodes[elements] = 1.0;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_faces(&self) -> usize {
        self.nodes.len()
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Element containing `x` (the left one at interior nodes).
    pub fn locate(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&n| n < x);
        k.saturating_sub(1).min(self.num_elements() - 1)
    }

    /// True if every point of `points` coincides (to 1e-12) with a node.
    pub fn contains_nodes(&self, points: &[f64]) -> bool {
        points
            .iter()
            .all(|&p| self.nodes.iter().any(|&n| (n - p).abs() <= 1e-12))
    }
}
