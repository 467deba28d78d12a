use std::collections::{BTreeMap, HashSet};

/// Query counts attributed to one phase label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCount {
    pub ccq: u64,
    pub label_requests: u64,
}

/// Exact accounting of oracle interactions for one run.
///
/// Counts only grow. Each query is also attributed to the phase label that
/// was current when it was asked. Repeated label requests for one position
/// are answered but counted once.
#[derive(Debug, Clone, Default)]
pub struct QueryLedger {
    ccq: u64,
    label_requests: u64,
    phase: String,
    phases: BTreeMap<String, PhaseCount>,
    requested: HashSet<usize>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ccq_count(&self) -> u64 {
        self.ccq
    }

    pub fn label_request_count(&self) -> u64 {
        self.label_requests
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn set_phase(&mut self, phase: &str) {
        if self.phase != phase {
            self.phase = phase.to_owned();
        }
    }

    pub fn phases(&self) -> &BTreeMap<String, PhaseCount> {
        &self.phases
    }

    fn current(&mut self) -> &mut PhaseCount {
        if !self.phases.contains_key(&self.phase) {
            self.phases.insert(self.phase.clone(), PhaseCount::default());
        }
        self.phases.get_mut(&self.phase).expect("inserted above")
    }

    pub fn record_ccq(&mut self) {
        self.ccq += 1;
        self.current().ccq += 1;
    }

    /// Returns whether `pos` had not been requested before.
    pub fn record_label_request(&mut self, pos: usize) -> bool {
        let fresh = self.requested.insert(pos);
        if fresh {
            self.label_requests += 1;
            self.current().label_requests += 1;
        }
        fresh
    }

    pub fn was_requested(&self, pos: usize) -> bool {
        self.requested.contains(&pos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_and_phases() {
        let mut l = QueryLedger::new();
        l.set_phase("a");
        l.record_ccq();
        assert!(l.record_label_request(3));
        assert!(!l.record_label_request(3));
        l.set_phase("b");
        l.record_ccq();
        l.record_ccq();
        for p in 0..100 {
            l.record_label_request(1000 + p);
        }
        assert_eq!(l.ccq_count(), 3);
        assert_eq!(l.label_request_count(), 101);
        let total: u64 = l.phases().values().map(|c| c.ccq).sum();
        assert_eq!(total, 3);
        assert_eq!(l.phases()["a"], PhaseCount { ccq: 1, label_requests: 1 });
    }
}
