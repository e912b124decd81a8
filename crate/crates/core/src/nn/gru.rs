use super::matrix::{sigmoid, Matrix};
use super::params::GruDirectionParams;
use crate::error::{Error, Result};

/// Intermediate values of one GRU step, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GruStep {
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub n: Vec<f64>,
    /// `r ∘ h_prev`
    pub rh: Vec<f64>,
    pub h: Vec<f64>,
}

/// One GRU step:
///
/// ```text
/// z  = σ(W_z x + U_z h + b_z)
/// r  = σ(W_r x + U_r h + b_r)
/// n  = tanh(W_n x + U_n (r ∘ h) + b_n)
/// h' = (1 − z) ∘ h + z ∘ n
/// ```
pub fn gru_cell(p: &GruDirectionParams, x: &[f64], h_prev: &[f64]) -> Result<Vec<f64>> {
    if x.len() != p.input_size() || h_prev.len() != p.hidden_size() {
        return Err(Error::Shape(format!(
            "gru cell expects input {} and hidden {}, got {} and {}",
            p.input_size(),
            p.hidden_size(),
            x.len(),
            h_prev.len()
        )));
    }
    Ok(gru_step(p, x, h_prev).h)
}

pub(crate) fn gru_step(p: &GruDirectionParams, x: &[f64], h_prev: &[f64]) -> GruStep {
    let h = p.hidden_size();
    let mut pre = p.bias.clone();
    p.w_input.mul_vec_add(x, &mut pre);
    p.w_hidden.mul_vec_rows_add(0, 2 * h, h_prev, &mut pre[..2 * h]);
    let z: Vec<f64> = pre[..h].iter().map(|&v| sigmoid(v)).collect();
    let r: Vec<f64> = pre[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    p.w_hidden.mul_vec_rows_add(2 * h, 3 * h, &rh, &mut pre[2 * h..]);
    let n: Vec<f64> = pre[2 * h..].iter().map(|v| v.tanh()).collect();
    let h_new = (0..h).map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * n[i]).collect();
    GruStep { z, r, n, rh, h: h_new }
}

/// Backpropagates `dh` (gradient w.r.t. the step output) through one step.
/// Parameter gradients accumulate into `grad`, the input gradient into `dx`.
/// Returns the gradient w.r.t. `h_prev`.
pub(crate) fn gru_step_backward(
    p: &GruDirectionParams,
    grad: &mut GruDirectionParams,
    x: &[f64],
    h_prev: &[f64],
    step: &GruStep,
    dh: &[f64],
    dx: &mut [f64],
) -> Vec<f64> {
    let h = p.hidden_size();
    let mut da = vec![0.0; 3 * h];
    let mut dh_prev = vec![0.0; h];
    for i in 0..h {
        let z = step.z[i];
        let n = step.n[i];
        da[i] = dh[i] * (n - h_prev[i]) * z * (1.0 - z);
        da[2 * h + i] = dh[i] * z * (1.0 - n * n);
        dh_prev[i] = dh[i] * (1.0 - z);
    }
    let mut d_rh = vec![0.0; h];
    p.w_hidden.t_mul_vec_rows_add(2 * h, 3 * h, &da[2 * h..], &mut d_rh);
    for i in 0..h {
        let r = step.r[i];
        da[h + i] = d_rh[i] * h_prev[i] * r * (1.0 - r);
        dh_prev[i] += d_rh[i] * r;
    }
    p.w_hidden.t_mul_vec_rows_add(0, 2 * h, &da[..2 * h], &mut dh_prev);
    p.w_input.t_mul_vec_add(&da, dx);

    grad.w_input.add_outer(&da, x);
    grad.w_hidden.add_outer_rows(0, &da[..2 * h], h_prev);
    grad.w_hidden.add_outer_rows(2 * h, &da[2 * h..], &step.rh);
    for (g, d) in grad.bias.iter_mut().zip(&da) {
        *g += d;
    }
    dh_prev
}

/// Builds a single-direction parameter set from per-gate blocks, gate order
/// z, r, n. Handy for hand-checked examples.
pub fn direction_from_gates(
    w_input: [&[f64]; 3],
    w_hidden: [&[f64]; 3],
    bias: [&[f64]; 3],
    input: usize,
    hidden: usize,
) -> Result<GruDirectionParams> {
    let stack = |blocks: [&[f64]; 3], len: usize| -> Result<Vec<f64>> {
        if blocks.iter().any(|b| b.len() != len) {
            return Err(Error::Shape(format!("gate block must hold {len} values")));
        }
        Ok(blocks.concat())
    };
    Ok(GruDirectionParams {
        w_input: Matrix {
            rows: 3 * hidden,
            cols: input,
            data: stack(w_input, hidden * input)?,
        },
        w_hidden: Matrix {
            rows: 3 * hidden,
            cols: hidden,
            data: stack(w_hidden, hidden * hidden)?,
        },
        bias: stack(bias, hidden)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_cell_stays_at_zero() {
        let p = GruDirectionParams::zeros(3, 2);
        assert_eq!(gru_cell(&p, &[0.3, -2.0, 9.0], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let step = gru_step(&p, &[1.0, 1.0, 1.0], &[0.0, 0.0]);
        assert_eq!(step.z, vec![0.5, 0.5]);
        assert_eq!(step.r, vec![0.5, 0.5]);
    }

    #[test]
    fn scalar_cell_matches_hand_value() {
        // every weight 1, biases 0, x = 1, h = 0
        let p = direction_from_gates([&[1.0]; 3], [&[1.0]; 3], [&[0.0]; 3], 1, 1).unwrap();
        let step = gru_step(&p, &[1.0], &[0.0]);
        assert!((step.z[0] - 0.731_06).abs() < 1e-5);
        assert!((step.r[0] - 0.731_06).abs() < 1e-5);
        assert!((step.n[0] - 0.761_59).abs() < 1e-5);
        assert!((step.h[0] - 0.556_77).abs() < 1e-5);
        // independent scalar evaluation of a second step from that state
        let h = step.h[0];
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let z = sig(1.0 + h);
        let r = sig(1.0 + h);
        let n = (1.0 + r * h).tanh();
        let h2 = gru_cell(&p, &[1.0], &[h]).unwrap();
        assert!((h2[0] - ((1.0 - z) * h + z * n)).abs() < 1e-15);
    }

    #[test]
    fn saturated_update_gate_keeps_state() {
        let p = direction_from_gates(
            [&[0.0], &[0.0], &[0.0]],
            [&[0.0], &[0.0], &[0.0]],
            [&[-50.0], &[0.0], &[0.0]],
            1,
            1,
        )
        .unwrap();
        let h = gru_cell(&p, &[3.0], &[0.7]).unwrap();
        assert!((h[0] - 0.7).abs() < 1e-20);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = GruDirectionParams::zeros(2, 3);
        assert!(gru_cell(&p, &[1.0], &[0.0; 3]).is_err());
        assert!(gru_cell(&p, &[1.0, 2.0], &[0.0; 2]).is_err());
    }
}
