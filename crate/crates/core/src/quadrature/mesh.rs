use crate::error::{Error, Result};

/// Graded time grid `t_j = T (j/N)^r`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    horizon: f64,
    panels: usize,
    grading: f64,
    nodes: Vec<f64>,
}

impl GradedMesh {
    pub fn new(horizon: f64, panels: usize, grading: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param(format!("mesh horizon must be positive, got {horizon}")));
        }
        if panels < 2 {
            return Err(Error::param(format!("mesh needs N >= 2 panels, got {panels}")));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::param(format!("grading exponent must be >= 1, got {grading}")));
        }
        let n = panels as f64;
        let mut nodes: Vec<f64> = (0..=panels).map(|j| horizon * (j as f64 / n).powf(grading)).collect();
        nodes[panels] = horizon;
        Ok(Self { horizon, panels, grading, nodes })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of panels N (there are N + 1 nodes).
    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The mesh with twice as many panels and the same grading.
    pub fn refined(&self) -> Self {
        Self::new(self.horizon, 2 * self.panels, self.grading).expect("refining a valid mesh")
    }
}

/// `T (j/N)^r` mesh constructor.
pub fn graded_mesh(horizon: f64, panels: usize, grading: f64) -> Result<GradedMesh> {
    GradedMesh::new(horizon, panels, grading)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert_eq!(graded_mesh(1.0, 4, 2.0).unwrap().nodes(), &[0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]);
        assert_eq!(graded_mesh(1.0, 4, 1.0).unwrap().nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(graded_mesh(2.0, 2, 3.0).unwrap().nodes(), &[0.0, 0.25, 2.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(graded_mesh(1.0, 1, 2.0).is_err());
        assert!(graded_mesh(1.0, 8, 0.5).is_err());
        assert!(graded_mesh(0.0, 8, 1.0).is_err());
    }

    #[test]
    fn strictly_increasing() {
        let m = graded_mesh(3.0, 512, 6.0).unwrap();
        assert!(m.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.nodes()[0], 0.0);
        assert_eq!(*m.nodes().last().unwrap(), 3.0);
        assert_eq!(m.refined().panels(), 1024);
    }
}
