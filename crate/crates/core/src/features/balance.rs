use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::trace::FlowTrace;

/// Number of records to keep per label.
pub type BalancePlan = BTreeMap<ProtocolLabel, usize>;

/// Truncates every label's record pool to the smallest pool.
///
/// All four labels must be present with at least one record.
pub fn balance(pools: &BTreeMap<ProtocolLabel, usize>) -> Result<BalancePlan> {
    for label in ProtocolLabel::ALL {
        match pools.get(&label) {
            Some(&n) if n > 0 => {}
            _ => return Err(Error::EmptyLabel(label)),
        }
    }
    let keep = ProtocolLabel::ALL
        .iter()
        .map(|l| pools[l])
        .min()
        .unwrap_or(0);
    Ok(ProtocolLabel::ALL.iter().map(|&l| (l, keep)).collect())
}

/// Applies a plan to traces. A label's pool is its traces in the given
/// order, and tail records beyond the plan's count are dropped (whole
/// trailing traces first, then the tail of the last kept one).
pub fn apply_balance(traces: Vec<(String, FlowTrace)>, plan: &BalancePlan) -> Vec<(String, FlowTrace)> {
    let mut budget: BTreeMap<ProtocolLabel, usize> = plan.clone();
    let mut kept = Vec::new();
    for (source, mut trace) in traces {
        let left = budget.entry(trace.label).or_insert(0);
        if *left == 0 {
            continue;
        }
        let take = trace.records.len().min(*left);
        trace.records.truncate(take);
        *left -= take;
        if take > 0 {
            kept.push((source, trace));
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::FeatureRecord;
    use ProtocolLabel::*;

    fn pools(v: [usize; 4]) -> BTreeMap<ProtocolLabel, usize> {
        ProtocolLabel::ALL.into_iter().zip(v).collect()
    }

    #[test]
    fn table_counts_truncate_to_minimum() {
        let plan = balance(&pools([3221, 1802, 1777, 1629])).unwrap();
        assert!(plan.values().all(|&n| n == 1629));
        assert_eq!(plan.len(), 4);
    }

    #[test]
    fn equal_counts_unchanged() {
        let plan = balance(&pools([10, 10, 10, 10])).unwrap();
        assert_eq!(plan, pools([10, 10, 10, 10]));
    }

    #[test]
    fn empty_label_is_named() {
        let err = balance(&pools([5, 0, 7, 9])).unwrap_err();
        assert_eq!(err.to_string(), "label reno empty");
        let mut missing = pools([5, 5, 5, 5]);
        missing.remove(&Bbr);
        assert_eq!(balance(&missing).unwrap_err().to_string(), "label bbr empty");
    }

    fn trace(label: ProtocolLabel, n: usize) -> FlowTrace {
        FlowTrace {
            label,
            records: (0..n)
                .map(|i| FeatureRecord {
                    time_s: i as f64 * 0.1,
                    size_bytes: 1,
                    max_win_bytes: 1,
                    throughput_mbps: 1.0,
                    smoothed_mbps: None,
                    rtt_ms: 1.0,
                })
                .collect(),
            interval_s: 0.1,
            path: None,
            transfer_bytes: n as u64,
            completed: true,
        }
    }

    #[test]
    fn apply_drops_tail_records() {
        let traces = vec![
            ("v1".to_string(), trace(Vegas, 50)),
            ("v2".to_string(), trace(Vegas, 50)),
            ("v3".to_string(), trace(Vegas, 50)),
            ("b1".to_string(), trace(Bbr, 70)),
        ];
        let plan: BalancePlan = [(Vegas, 70), (Bbr, 70)].into_iter().collect();
        let kept = apply_balance(traces, &plan);
        let lens: Vec<_> = kept.iter().map(|(s, t)| (s.as_str(), t.records.len())).collect();
        assert_eq!(lens, vec![("v1", 50), ("v2", 20), ("b1", 70)]);
    }
}
