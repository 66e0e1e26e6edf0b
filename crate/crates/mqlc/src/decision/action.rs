//! Discrete meta-actions and canonically indexed joint actions.

/// High-level command realized by the low-level controllers over one
/// decision tick. Integer codes are contractual: joint indexing and
/// checkpointed heads depend on them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetaAction {
    LaneLeft = 0,
    Idle = 1,
    LaneRight = 2,
    Faster = 3,
    Slower = 4,
}

pub const META_ACTION_COUNT: usize = 5;

impl MetaAction {
    pub const ALL: [MetaAction; META_ACTION_COUNT] = [
        MetaAction::LaneLeft,
        MetaAction::Idle,
        MetaAction::LaneRight,
        MetaAction::Faster,
        MetaAction::Slower,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<MetaAction> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            MetaAction::LaneLeft => "lane_left",
            MetaAction::Idle => "idle",
            MetaAction::LaneRight => "lane_right",
            MetaAction::Faster => "faster",
            MetaAction::Slower => "slower",
        }
    }
}

/// Ordered tuple of one meta-action per agent with a canonical base-5
/// integer index (agent 0 is the most significant digit).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointAction {
    actions: Vec<MetaAction>,
}

impl JointAction {
    pub fn new(actions: Vec<MetaAction>) -> Self {
        assert!(!actions.is_empty(), "joint action needs at least one agent");
        JointAction { actions }
    }

    pub fn from_index(n_agents: usize, mut index: usize) -> Self {
        assert!(index < META_ACTION_COUNT.pow(n_agents as u32));
        let mut actions = vec![MetaAction::Idle; n_agents];
        for slot in (0..n_agents).rev() {
            actions[slot] = MetaAction::from_index(index % META_ACTION_COUNT).expect("digit < 5");
            index /= META_ACTION_COUNT;
        }
        JointAction { actions }
    }

    pub fn index(&self) -> usize {
        self.actions
            .iter()
            .fold(0, |acc, a| acc * META_ACTION_COUNT + a.index())
    }

    pub fn actions(&self) -> &[MetaAction] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn agent(&self, i: usize) -> MetaAction {
        self.actions[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_base5_big_endian() {
        let j = JointAction::new(vec![MetaAction::Idle, MetaAction::Faster]);
        assert_eq!(j.index(), 1 * 5 + 3);
        let j = JointAction::new(vec![MetaAction::Slower, MetaAction::LaneLeft, MetaAction::LaneRight]);
        assert_eq!(j.index(), 4 * 25 + 0 * 5 + 2);
    }

    #[test]
    fn bijection_exhaustive_small_n() {
        for n in 1..=3 {
            for idx in 0..META_ACTION_COUNT.pow(n as u32) {
                let j = JointAction::from_index(n, idx);
                assert_eq!(j.index(), idx);
                assert_eq!(JointAction::from_index(n, j.index()), j);
            }
        }
    }
}
