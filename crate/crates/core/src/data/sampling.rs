use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::table::DataTable;
use super::DataError;

/// `floor(fraction * n)`, guarded against products like `0.29 * 100 = 28.999999999999996`.
pub fn exact_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx
}

/// Uniform sample without replacement of exactly `floor(fraction * n)` rows, in original row order.
pub fn sample_rows(table: &DataTable, fraction: f64, seed: u64) -> Result<DataTable, DataError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DataError::InvalidArgument(format!("sample fraction {fraction} not in (0, 1]")));
    }
    let n = table.row_count();
    let k = exact_count(fraction, n);
    let mut picked = shuffled_indices(n, seed);
    picked.truncate(k);
    picked.sort_unstable();
    Ok(table.take_rows(&picked))
}

/// Seeded shuffle, then the first `floor(test_fraction * n)` rows form the test set.
/// Both parts keep the original row order.
pub fn train_test_split(table: &DataTable, test_fraction: f64, seed: u64) -> Result<(DataTable, DataTable), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!("test fraction {test_fraction} not in (0, 1)")));
    }
    let n = table.row_count();
    if n < 2 {
        return Err(DataError::InvalidArgument(format!("cannot split a table with {n} rows")));
    }
    let n_test = exact_count(test_fraction, n);
    let order = shuffled_indices(n, seed);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((table.take_rows(&train), table.take_rows(&test)))
}
