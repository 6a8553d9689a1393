use std::fmt;

use serde::{Deserialize, Serialize};

use super::PipelineError;

/// A real-valued feature vector, stored densely or as ascending `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FeatureVector {
    Dense { values: Vec<f64> },
    Sparse { size: usize, indices: Vec<usize>, values: Vec<f64> },
}

impl FeatureVector {
    pub fn dense(values: Vec<f64>) -> Result<Self, PipelineError> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(PipelineError::InvalidVector("NaN value".into()));
        }
        Ok(FeatureVector::Dense { values })
    }

    pub fn sparse(size: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self, PipelineError> {
        if indices.len() != values.len() {
            return Err(PipelineError::InvalidVector(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PipelineError::InvalidVector("sparse indices must be strictly ascending".into()));
        }
        if indices.last().is_some_and(|&i| i >= size) {
            return Err(PipelineError::InvalidVector(format!("sparse index out of range for size {size}")));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(PipelineError::InvalidVector("NaN value".into()));
        }
        Ok(FeatureVector::Sparse { size, indices, values })
    }

    /// Picks whichever representation is smaller: sparse when `1.5 * (nnz + 1) < size`.
    pub fn compressed(values: Vec<f64>) -> Result<Self, PipelineError> {
        let nnz = values.iter().filter(|v| **v != 0.0).count();
        if 1.5 * (nnz as f64 + 1.0) < values.len() as f64 {
            let size = values.len();
            let (indices, values): (Vec<usize>, Vec<f64>) = values
                .into_iter()
                .enumerate()
                .filter(|(_, v)| *v != 0.0)
                .unzip();
            Self::sparse(size, indices, values)
        } else {
            Self::dense(values)
        }
    }

    pub fn size(&self) -> usize {
        match self {
            FeatureVector::Dense { values } => values.len(),
            FeatureVector::Sparse { size, .. } => *size,
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense { values } => values[i],
            FeatureVector::Sparse { indices, values, .. } => match indices.binary_search(&i) {
                Ok(pos) => values[pos],
                Err(_) => 0.0,
            },
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            FeatureVector::Dense { values } => values.clone(),
            FeatureVector::Sparse { size, indices, values } => {
                let mut out = vec![0.0; *size];
                for (&i, &v) in indices.iter().zip(values) {
                    out[i] = v;
                }
                out
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FeatureVector::Dense { values } | FeatureVector::Sparse { values, .. } => {
                values.iter().all(|v| v.is_finite())
            }
        }
    }
}

fn write_values(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    f.write_str("[")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v:?}")?;
    }
    f.write_str("]")
}

/// Dense vectors render as `[1.0,0.5]`, sparse ones as `(7,[0,2],[1.0,0.5])`.
impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureVector::Dense { values } => write_values(f, values),
            FeatureVector::Sparse { size, indices, values } => {
                write!(f, "({size},[")?;
                for (i, idx) in indices.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{idx}")?;
                }
                f.write_str("],")?;
                write_values(f, values)?;
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compressed_picks_sparse_for_mostly_zero() {
        let v = FeatureVector::compressed(vec![1.0, 0.0, 0.5, 0.0, 0.25, 0.0, 0.0]).unwrap();
        assert!(matches!(v, FeatureVector::Sparse { .. }));
        assert_eq!(v.to_string(), "(7,[0,2,4],[1.0,0.5,0.25])");
        assert_eq!(v.get(2), 0.5);
        assert_eq!(v.get(3), 0.0);

        let d = FeatureVector::compressed(vec![1.0, 2.0]).unwrap();
        assert_eq!(d.to_string(), "[1.0,2.0]");
    }

    #[test]
    fn rejects_bad_sparse() {
        assert!(FeatureVector::sparse(3, vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(FeatureVector::sparse(3, vec![3], vec![1.0]).is_err());
        assert!(FeatureVector::dense(vec![f64::NAN]).is_err());
    }
}
