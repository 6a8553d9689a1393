//! Seeded synthetic benefit-plan tables.
//!
//! Each row draws its label first (Bernoulli with the requested positive rate), then
//! every feature conditioned on that label. Categorical generators split their categories
//! in two halves: positives prefer the lower half and negatives the upper half, and
//! `signal` is the probability of drawing from the preferred half instead of uniformly.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::{ColumnData, ColumnKind, ColumnSpec, DataTable};
use super::DataError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthFeature {
    Categorical {
        name: String,
        cardinality: usize,
        signal: f64,
        #[serde(default)]
        null_rate: f64,
    },
    Numeric {
        name: String,
        levels: usize,
        base: f64,
        signal: f64,
        #[serde(default)]
        null_rate: f64,
    },
    Constant {
        name: String,
        value: String,
    },
    /// Two binary text columns whose parity equals the label (flipped with probability `noise`).
    /// Each column alone carries no information about the label.
    XorPair {
        left: String,
        right: String,
        noise: f64,
    },
}

impl SynthFeature {
    fn names(&self) -> Vec<&str> {
        match self {
            SynthFeature::Categorical { name, .. }
            | SynthFeature::Numeric { name, .. }
            | SynthFeature::Constant { name, .. } => vec![name],
            SynthFeature::XorPair { left, right, .. } => vec![left, right],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub row_count: usize,
    pub positive_rate: f64,
    pub seed: u64,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default = "default_positive")]
    pub positive_token: String,
    #[serde(default = "default_negative")]
    pub negative_token: String,
    pub features: Vec<SynthFeature>,
}

fn default_label_column() -> String {
    "IsCovered".into()
}
fn default_positive() -> String {
    "Covered".into()
}
fn default_negative() -> String {
    "Not Covered".into()
}

impl SynthSpec {
    /// Benefit-plan-like table: one dominant categorical (`Exclusions`), a constant column
    /// (`IsEHB`), and weak-signal plan attributes. At positive rates near 0.8 the signals are
    /// small enough that every combination of values still has a positive majority.
    pub fn benefits(row_count: usize, positive_rate: f64, seed: u64) -> Self {
        let cat = |name: &str, cardinality, signal| SynthFeature::Categorical {
            name: name.into(),
            cardinality,
            signal,
            null_rate: 0.0,
        };
        Self {
            row_count,
            positive_rate,
            seed,
            label_column: default_label_column(),
            positive_token: default_positive(),
            negative_token: default_negative(),
            features: vec![
                cat("StateCode", 36, 0.03),
                cat("SourceName", 3, 0.04),
                cat("IssuerId", 60, 0.06),
                SynthFeature::Numeric {
                    name: "BusinessYear".into(),
                    levels: 5,
                    base: 2017.0,
                    signal: 0.06,
                    null_rate: 0.0,
                },
                cat("QuantLimitOnSvc", 2, 0.06),
                cat("Exclusions", 10, 0.42),
                SynthFeature::Constant { name: "IsEHB".into(), value: "Yes".into() },
            ],
        }
    }

    /// Balanced table whose label is an interaction of two columns, plus uninformative noise columns.
    pub fn interaction(row_count: usize, seed: u64) -> Self {
        Self {
            row_count,
            positive_rate: 0.5,
            seed,
            label_column: default_label_column(),
            positive_token: default_positive(),
            negative_token: default_negative(),
            features: vec![
                SynthFeature::XorPair { left: "MetalLevel".into(), right: "PlanType".into(), noise: 0.05 },
                SynthFeature::Categorical { name: "StateCode".into(), cardinality: 12, signal: 0.0, null_rate: 0.0 },
                SynthFeature::Categorical { name: "SourceName".into(), cardinality: 3, signal: 0.0, null_rate: 0.0 },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidArgument(m));
        if self.row_count == 0 {
            return bad("row_count must be positive".into());
        }
        if !(self.positive_rate > 0.0 && self.positive_rate < 1.0) {
            return bad(format!("positive_rate {} not strictly inside (0, 1)", self.positive_rate));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let mut names: HashSet<&str> = HashSet::from([self.label_column.as_str()]);
        for f in &self.features {
            for name in f.names() {
                if !names.insert(name) {
                    return bad(format!("duplicate column name {name:?}"));
                }
            }
            match f {
                SynthFeature::Categorical { name, cardinality, signal, null_rate } => {
                    if *cardinality < 1 || !unit(*signal) || !unit(*null_rate) {
                        return bad(format!("categorical {name:?}: need cardinality >= 1 and signal, null_rate in [0, 1]"));
                    }
                }
                SynthFeature::Numeric { name, levels, signal, null_rate, base } => {
                    if *levels < 1 || !unit(*signal) || !unit(*null_rate) || !base.is_finite() {
                        return bad(format!("numeric {name:?}: need levels >= 1 and signal, null_rate in [0, 1]"));
                    }
                }
                SynthFeature::Constant { .. } => {}
                SynthFeature::XorPair { noise, .. } => {
                    if !(0.0..=0.5).contains(noise) {
                        return bad(format!("xor noise {noise} not in [0, 0.5]"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Schema of the generated table, label source last.
    pub fn schema(&self) -> Vec<ColumnSpec> {
        let mut schema = Vec::new();
        for f in &self.features {
            match f {
                SynthFeature::Categorical { name, null_rate, .. } => {
                    schema.push(ColumnSpec::new(name.clone(), ColumnKind::CategoricalText, *null_rate > 0.0))
                }
                SynthFeature::Numeric { name, null_rate, .. } => {
                    schema.push(ColumnSpec::new(name.clone(), ColumnKind::Numeric, *null_rate > 0.0))
                }
                SynthFeature::Constant { name, .. } => {
                    schema.push(ColumnSpec::new(name.clone(), ColumnKind::CategoricalText, false))
                }
                SynthFeature::XorPair { left, right, .. } => {
                    schema.push(ColumnSpec::new(left.clone(), ColumnKind::CategoricalText, false));
                    schema.push(ColumnSpec::new(right.clone(), ColumnKind::CategoricalText, false));
                }
            }
        }
        schema.push(ColumnSpec::new(self.label_column.clone(), ColumnKind::CategoricalText, false));
        schema
    }
}

fn preferred_level<R: Rng>(rng: &mut R, levels: usize, signal: f64, positive: bool) -> usize {
    if levels == 1 {
        return 0;
    }
    let half = levels.div_ceil(2);
    if rng.random::<f64>() < signal {
        if positive {
            rng.random_range(0..half)
        } else {
            rng.random_range(half..levels)
        }
    } else {
        rng.random_range(0..levels)
    }
}

enum Sink {
    Text(Vec<Option<String>>),
    Numeric(Vec<Option<f64>>),
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<DataTable, DataError> {
    spec.validate()?;
    let n = spec.row_count;
    let schema = spec.schema();
    let mut sinks: Vec<Sink> = schema
        .iter()
        .map(|s| match s.kind {
            ColumnKind::Numeric => Sink::Numeric(Vec::with_capacity(n)),
            _ => Sink::Text(Vec::with_capacity(n)),
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    for _ in 0..n {
        let positive = rng.random::<f64>() < spec.positive_rate;
        let mut col = 0;
        for f in &spec.features {
            match f {
                SynthFeature::Categorical { name, cardinality, signal, null_rate } => {
                    let level = preferred_level(&mut rng, *cardinality, *signal, positive);
                    let is_null = *null_rate > 0.0 && rng.random::<f64>() < *null_rate;
                    if let Sink::Text(v) = &mut sinks[col] {
                        v.push((!is_null).then(|| format!("{name}_{level:02}")));
                    }
                    col += 1;
                }
                SynthFeature::Numeric { levels, base, signal, null_rate, .. } => {
                    let level = preferred_level(&mut rng, *levels, *signal, positive);
                    let is_null = *null_rate > 0.0 && rng.random::<f64>() < *null_rate;
                    if let Sink::Numeric(v) = &mut sinks[col] {
                        v.push((!is_null).then_some(base + level as f64));
                    }
                    col += 1;
                }
                SynthFeature::Constant { value, .. } => {
                    if let Sink::Text(v) = &mut sinks[col] {
                        v.push(Some(value.clone()));
                    }
                    col += 1;
                }
                SynthFeature::XorPair { left, right, noise } => {
                    let a = rng.random_bool(0.5);
                    let flip = rng.random::<f64>() < *noise;
                    let b = a ^ positive ^ flip;
                    if let Sink::Text(v) = &mut sinks[col] {
                        v.push(Some(format!("{left}_{}", u8::from(a))));
                    }
                    if let Sink::Text(v) = &mut sinks[col + 1] {
                        v.push(Some(format!("{right}_{}", u8::from(b))));
                    }
                    col += 2;
                }
            }
        }
        if let Sink::Text(v) = &mut sinks[col] {
            let token = if positive { &spec.positive_token } else { &spec.negative_token };
            v.push(Some(token.clone()));
        }
    }

    let columns = sinks
        .into_iter()
        .map(|s| match s {
            Sink::Text(v) => ColumnData::Text(v),
            Sink::Numeric(v) => ColumnData::Numeric(v),
        })
        .collect();
    DataTable::new(schema, columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn positive_rate(t: &DataTable) -> f64 {
        let col = t.column("IsCovered").unwrap();
        let pos = (0..t.row_count()).filter(|&r| col.render(r).as_deref() == Some("Covered")).count();
        pos as f64 / t.row_count() as f64
    }

    #[test]
    fn positive_rate_concentrates() {
        // Binomial sd at n=10k, p=0.81 is ~0.0039, so +-0.01 is ~2.5 sd.
        let t = generate_synthetic(&SynthSpec::benefits(10_000, 0.81, 1)).unwrap();
        let rate = positive_rate(&t);
        assert!((rate - 0.81).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn constant_column_has_one_value() {
        let t = generate_synthetic(&SynthSpec::benefits(2_000, 0.81, 5)).unwrap();
        let col = t.column("IsEHB").unwrap();
        let distinct: BTreeSet<_> = (0..t.row_count()).map(|r| col.render(r)).collect();
        assert_eq!(distinct.len(), 1);
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec::benefits(500, 0.7, 9);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SynthSpec { seed: 10, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn xor_columns_individually_uninformative() {
        let t = generate_synthetic(&SynthSpec::interaction(20_000, 3)).unwrap();
        let label = t.column("IsCovered").unwrap();
        let left = t.column("MetalLevel").unwrap();
        let right = t.column("PlanType").unwrap();
        let mut agree = 0;
        let mut left_pos = [0usize; 2];
        for r in 0..t.row_count() {
            let y = label.render(r).as_deref() == Some("Covered");
            let a = left.render(r).unwrap().ends_with('1');
            let b = right.render(r).unwrap().ends_with('1');
            if (a ^ b) == y {
                agree += 1;
            }
            left_pos[usize::from(a)] += usize::from(y);
        }
        let agree = agree as f64 / t.row_count() as f64;
        assert!((agree - 0.95).abs() < 0.01, "{agree}");
        let ratio = left_pos[1] as f64 / (left_pos[0] + left_pos[1]) as f64;
        assert!((ratio - 0.5).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn invalid_specs() {
        let mut s = SynthSpec::benefits(10, 0.5, 1);
        s.positive_rate = 1.0;
        assert!(generate_synthetic(&s).is_err());
        let mut s = SynthSpec::benefits(10, 0.5, 1);
        s.features.push(SynthFeature::Categorical { name: "x".into(), cardinality: 0, signal: 0.1, null_rate: 0.0 });
        assert!(generate_synthetic(&s).is_err());
        let mut s = SynthSpec::benefits(10, 0.5, 1);
        s.row_count = 0;
        assert!(generate_synthetic(&s).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::interaction(100, 2);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SynthSpec>(&text).unwrap(), spec);
    }
}
