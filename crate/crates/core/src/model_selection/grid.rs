use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::SelectionError;
use crate::classifiers::{registry, ClassifierParams, GridAxis};

/// Base parameters plus axes to vary. Cells enumerate the cartesian product with the first
/// axis outermost and the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub base: ClassifierParams,
    pub axes: Vec<GridAxis>,
}

impl ParamGrid {
    pub fn new(base: ClassifierParams) -> Self {
        Self { base, axes: Vec::new() }
    }

    pub fn axis(mut self, name: &str, values: Vec<Value>) -> Self {
        self.axes.push(GridAxis::new(name, values));
        self
    }

    /// Default parameters and default axes for a family.
    pub fn default_for(family: &str) -> Result<Self, SelectionError> {
        let trainer = registry().get(family)?;
        Ok(Self { base: trainer.default_params(), axes: trainer.default_grid() })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Result<Vec<ClassifierParams>, SelectionError> {
        if self.is_empty() {
            return Err(SelectionError::EmptyGrid);
        }
        let mut cells = vec![self.base.clone()];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(cells.len() * axis.values.len());
            for cell in &cells {
                for v in &axis.values {
                    next.push(cell.set(&axis.name, v)?);
                }
            }
            cells = next;
        }
        Ok(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{ClassifierError, SvmParams};
    use serde_json::json;

    #[test]
    fn svm_default_grid_enumerates_32_distinct_cells() {
        let g = ParamGrid::default_for("svm").unwrap();
        let cells = g.cells().unwrap();
        assert_eq!(cells.len(), 32);
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                assert_ne!(a, b);
            }
        }
        let ClassifierParams::Svm(first) = &cells[0] else { panic!() };
        assert_eq!((first.reg_param, first.max_iter, first.tol), (0.01, 1, 1e-4));
        let ClassifierParams::Svm(second) = &cells[1] else { panic!() };
        assert!(!second.standardization && second.fit_intercept);
    }

    #[test]
    fn no_axes_is_one_cell_and_empty_axis_is_error() {
        let g = ParamGrid::new(ClassifierParams::Svm(SvmParams::default()));
        assert_eq!(g.cells().unwrap().len(), 1);
        let g = g.axis("regParam", vec![]);
        assert!(matches!(g.cells(), Err(SelectionError::EmptyGrid)));
    }

    #[test]
    fn unknown_axis_is_rejected() {
        let g = ParamGrid::default_for("lr").unwrap().axis("numTrees", vec![json!(3)]);
        assert!(matches!(g.cells(), Err(SelectionError::Classifier(ClassifierError::UnknownParam { .. }))));
    }
}
