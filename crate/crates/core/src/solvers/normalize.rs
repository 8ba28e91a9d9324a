use nalgebra::DMatrix;

/// Columns with norm below this are treated as identically zero.
pub const ZERO_COLUMN_NORM: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NormalizedDesign {
    pub t: DMatrix<f64>,
    pub norms: Vec<f64>,
    pub zero_columns: Vec<usize>,
}

/// Scales every column of `x` to unit ℓ2 norm. Degenerate columns stay zero
/// and are listed in `zero_columns`.
pub fn column_normalize(x: &DMatrix<f64>) -> NormalizedDesign {
    let mut t = x.clone();
    let mut norms = Vec::with_capacity(x.ncols());
    let mut zero_columns = Vec::new();
    for (j, mut col) in t.column_iter_mut().enumerate() {
        let norm = col.norm();
        norms.push(norm);
        if norm < ZERO_COLUMN_NORM {
            col.fill(0.0);
            zero_columns.push(j);
        } else {
            col /= norm;
        }
    }
    NormalizedDesign { t, norms, zero_columns }
}
