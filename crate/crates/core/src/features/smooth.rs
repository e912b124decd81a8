use crate::trace::FlowTrace;

/// Default trailing window, in sampling intervals (500 ms at 100 ms).
pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

/// Trailing moving average. Element `i` is the mean of
/// `values[max(0, i + 1 - window)..=i]`, so the first `window - 1` outputs
/// average the available prefix and the output has the input's length.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let slice = &values[lo..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Computes the smoothed-throughput column for a trace whose column is
/// missing or incomplete. Fully populated columns (e.g. from external
/// capture tooling) are kept.
pub fn fill_smoothed(trace: &mut FlowTrace, window: usize) {
    if trace.records.iter().all(|r| r.smoothed_mbps.is_some()) {
        return;
    }
    let raw: Vec<f64> = trace.records.iter().map(|r| r.throughput_mbps).collect();
    for (record, value) in trace.records.iter_mut().zip(smooth(&raw, window)) {
        record.smoothed_mbps = Some(value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(values: &[f64], window: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(values.len());
        for i in 0..values.len() {
            let start = if i + 1 >= window { i + 1 - window } else { 0 };
            let mut total = 0.0;
            let mut count = 0usize;
            for v in &values[start..=i] {
                total += *v;
                count += 1;
            }
            out.push(total / count as f64);
        }
        out
    }

    #[test]
    fn examples() {
        assert_eq!(smooth(&[10.0, 20.0, 30.0], 1), vec![10.0, 20.0, 30.0]);
        assert_eq!(smooth(&[10.0, 20.0, 30.0, 40.0], 2), vec![10.0, 15.0, 25.0, 35.0]);
        assert_eq!(smooth(&[7.5; 9], 4), vec![7.5; 9]);
        assert!(smooth(&[], 3).is_empty());
    }

    proptest! {
        #[test]
        fn matches_brute_force(values in proptest::collection::vec(0.0f64..1e4, 0..200), window in 1usize..30) {
            prop_assert_eq!(smooth(&values, window), brute_force(&values, window));
        }

        #[test]
        fn bounded_by_input(values in proptest::collection::vec(-1e6f64..1e6, 1..100), window in 1usize..20) {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for v in smooth(&values, window) {
                prop_assert!(v >= lo - 1e-9 * lo.abs().max(1.0) && v <= hi + 1e-9 * hi.abs().max(1.0));
            }
        }

        #[test]
        fn shift_equivariant(values in proptest::collection::vec(0.0f64..1e3, 1..100), window in 1usize..20, shift in -1e3f64..1e3) {
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            for (a, b) in smooth(&values, window).iter().zip(smooth(&shifted, window)) {
                prop_assert!((a + shift - b).abs() < 1e-9);
            }
        }
    }
}
