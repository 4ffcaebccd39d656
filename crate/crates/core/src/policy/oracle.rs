use super::{Action, Observation};
use crate::instance::{ArmLabel, ArmType};

/// Full-information benchmark: keeps drawing new arms until one turns out
/// optimal, then pulls that arm forever.
#[derive(Debug, Clone, Default)]
pub struct OraclePolicy {
    t: u64,
    committed: Option<ArmLabel>,
    first_success: Option<u64>,
}

impl OraclePolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn committed(&self) -> Option<ArmLabel> {
        self.committed
    }

    /// Time step at which an optimal arm was first pulled (`Y`).
    pub fn first_success(&self) -> Option<u64> {
        self.first_success
    }

    /// `last` carries the previous observation together with the true type
    /// of the arm that produced it.
    pub fn step(&mut self, last: Option<(Observation, ArmType)>) -> Action {
        self.record(last);
        self.t += 1;
        match self.committed {
            Some(l) => Action::PullExisting(l),
            None => Action::QueryNew,
        }
    }

    /// Takes in the feedback of the final step, which no later `step` call
    /// would otherwise see.
    pub fn finish(&mut self, last: Option<(Observation, ArmType)>) {
        self.record(last);
    }

    fn record(&mut self, last: Option<(Observation, ArmType)>) {
        if let (None, Some((obs, ArmType::Optimal))) = (self.committed, last) {
            self.committed = Some(obs.label);
            self.first_success = Some(self.t);
        }
    }
}
