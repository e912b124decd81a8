/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out[i - lo] += row_i · x` for rows `lo..hi`.
    pub fn mul_vec_rows_add(&self, lo: usize, hi: usize, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (o, r) in out.iter_mut().zip(lo..hi) {
            *o += dot(self.row(r), x);
        }
    }

    pub fn mul_vec_add(&self, x: &[f64], out: &mut [f64]) {
        self.mul_vec_rows_add(0, self.rows, x, out);
    }

    /// `out += Σ_i y[i - lo] · row_i` for rows `lo..hi` (transpose product).
    pub fn t_mul_vec_rows_add(&self, lo: usize, hi: usize, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cols);
        for (&yi, r) in y.iter().zip(lo..hi) {
            if yi != 0.0 {
                axpy(yi, self.row(r), out);
            }
        }
    }

    pub fn t_mul_vec_add(&self, y: &[f64], out: &mut [f64]) {
        self.t_mul_vec_rows_add(0, self.rows, y, out);
    }

    /// Rows `lo..hi` gain the outer product `a ⊗ b`.
    pub fn add_outer_rows(&mut self, lo: usize, a: &[f64], b: &[f64]) {
        debug_assert_eq!(b.len(), self.cols);
        for (i, &ai) in a.iter().enumerate() {
            if ai != 0.0 {
                axpy(ai, b, self.row_mut(lo + i));
            }
        }
    }

    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        self.add_outer_rows(0, a, b);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha · x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `log softmax(logits)[index]`, computed with max subtraction.
pub fn log_softmax_at(logits: &[f64], index: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logits[index] - max - lse
}
