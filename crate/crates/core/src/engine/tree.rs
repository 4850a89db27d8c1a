use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use serde::Serialize;

use crate::model::{find_lambda_star, LambdaStar, OffspringLaw, StepLaw, CRITICAL_BAND};

use super::rng::{child_key, node_rng, TrialRng};
use super::sampler::{CountSampler, StepSampler};
use super::EngineError;

/// Caps on a single simulated tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Limits {
    /// Living nodes counted before the trial is censored.
    pub max_nodes: u64,
    /// Deepest generation expanded.
    pub max_depth: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 10_000_000,
            max_depth: 1_000_000,
        }
    }
}

/// Pruning rule for the un-killed maximum: a subtree rooted at `s` is dropped
/// once `e^{-λ*(best + 1 - s)} <= eps / frontier_budget`, and exploration fails
/// if the frontier grows past `frontier_budget`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruneConfig {
    pub eps: f64,
    pub frontier_budget: usize,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            eps: 1e-6,
            frontier_budget: 100_000,
        }
    }
}

/// One killed tree.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Living nodes, root included. A lower bound when `truncated`.
    pub z: u64,
    /// Highest living position.
    pub m_living: i64,
    /// Highest position among explored nodes, living or not.
    pub m_all: i64,
    /// Upper bound on `P(M̄ > m_all)` given the explored part; `None` when the
    /// walk is supercritical or not well-controlled.
    pub prune_bias_bound: Option<f64>,
    /// Deepest living generation.
    pub depth: u32,
    pub truncated: bool,
    /// Living nodes visited plus killed children generated.
    pub nodes_explored: u64,
    /// First generation holding a living node at `m_living`.
    pub max_generation: u32,
    /// Whether every living node at height `m_living` descends from a single
    /// one, i.e. the event `ℳ_{M, max_generation}` holds.
    pub max_isolated: bool,
    /// `|ℒ_n|` for `n` below the simulator's level horizon.
    pub levels: Vec<u64>,
    /// Un-killed exploration stopped at the frontier budget.
    pub budget_exceeded: bool,
}

/// Result of exploring the un-killed tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxOutcome {
    pub m_all: i64,
    /// `Σ e^{-λ*(m_all + 1 - s)}` over unexplored subtrees rooted at `s`.
    pub bias_bound: f64,
    pub expanded: u64,
    pub frontier_peak: usize,
    pub reached_target: bool,
    /// The tail bound behind `bias_bound` holds for this walk.
    pub certified: bool,
}

/// Off-spine summaries and the spine itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpineTrial {
    /// `S_{v_0}, ..., S_{v_n}` with `S_{v_0} = 0`.
    pub spine_positions: Vec<i64>,
    pub spine_alive: bool,
    /// `C_0, ..., C_n`, each distributed as `B̂ - 1`.
    pub offspring_counts: Vec<u32>,
    /// For each living `v_i`, the highest living position off the spine
    /// relative to `S_{v_i}` (at least 0, from `v_i` itself); `None` once the
    /// spine has died.
    pub off_spine_max: Option<Vec<Option<i64>>>,
}

/// Produces the child steps of a node.
trait Expander {
    fn expand(&mut self, key: u64, out: &mut Vec<i64>) -> u32;
}

/// Draws from one sequential stream, in visiting order.
struct StreamExpander<'a> {
    rng: &'a mut TrialRng,
    steps: &'a StepSampler,
    counts: &'a CountSampler,
}

impl Expander for StreamExpander<'_> {
    #[inline]
    fn expand(&mut self, _key: u64, out: &mut Vec<i64>) -> u32 {
        let k = self.counts.sample(self.rng);
        for _ in 0..k {
            out.push(self.steps.sample(self.rng));
        }
        k
    }
}

/// Draws each node's children from its own keyed stream, so the tree does not
/// depend on the order nodes are visited in.
struct KeyedExpander<'a> {
    seed: [u8; 32],
    steps: &'a StepSampler,
    counts: &'a CountSampler,
}

impl Expander for KeyedExpander<'_> {
    #[inline]
    fn expand(&mut self, key: u64, out: &mut Vec<i64>) -> u32 {
        let mut rng = node_rng(&self.seed, key);
        let k = self.counts.sample(&mut rng);
        for _ in 0..k {
            out.push(self.steps.sample(&mut rng));
        }
        k
    }
}

struct Frame {
    pos: i64,
    key: u64,
    id: u64,
    start: usize,
    next: usize,
    end: usize,
}

/// Living-tree statistics of one killed DFS.
#[derive(Debug, Default)]
struct KilledStats {
    z: u64,
    best: i64,
    /// Preorder id of the first node found at `best`; while its subtree is
    /// open it occupies the path slot of its generation.
    best_id: u64,
    best_generation: u32,
    min_generation_at_best: u32,
    isolated: bool,
    depth: u32,
    truncated: bool,
    explored: u64,
    /// `Σ e^{λ* s}` over killed children and unexplored pending children.
    unexplored_weight: f64,
    levels: Vec<u64>,
}

/// Simulates killed branching random walks for one pair of laws.
#[derive(Debug, Clone)]
pub struct Simulator {
    step: StepLaw,
    offspring: OffspringLaw,
    steps: StepSampler,
    counts: CountSampler,
    off_spine: Option<CountSampler>,
    star: Option<LambdaStar>,
    certified: bool,
    limits: Limits,
    level_count: usize,
}

impl Simulator {
    pub fn new(step: StepLaw, offspring: OffspringLaw, limits: Limits) -> Result<Self, EngineError> {
        if limits.max_nodes == 0 || limits.max_depth == 0 {
            return Err(EngineError::BadLimits(format!(
                "max_nodes {} and max_depth {} must be positive",
                limits.max_nodes, limits.max_depth
            )));
        }
        let star = find_lambda_star(&step).ok();
        // P(M̄ >= k) <= e^{-λ* k} needs E B · e^{Λ(λ*)} <= 1
        let certified = star.is_some_and(|s| offspring.log_mean() <= s.f_star + CRITICAL_BAND);
        let off_spine = (offspring.mean() > 0.0).then(|| CountSampler::off_spine(&offspring));
        Ok(Simulator {
            steps: StepSampler::new(&step),
            counts: CountSampler::offspring(&offspring),
            off_spine,
            step,
            offspring,
            star,
            certified,
            limits,
            level_count: 0,
        })
    }

    /// Records `|ℒ_n|` for `n < count` in every [`TrialRecord`].
    pub fn with_level_count(mut self, count: usize) -> Self {
        self.level_count = count;
        self
    }

    pub fn step(&self) -> &StepLaw {
        &self.step
    }

    pub fn offspring(&self) -> &OffspringLaw {
        &self.offspring
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn lambda_star(&self) -> Option<f64> {
        self.star.map(|s| s.lambda_star)
    }

    /// Whether the tail bound behind the pruning certificate applies.
    pub fn certified(&self) -> bool {
        self.certified
    }

    fn bias_from_weight(&self, weight: f64, m_all: i64) -> Option<f64> {
        let star = self.star.filter(|_| self.certified)?;
        Some(weight * (-star.lambda_star * (m_all + 1) as f64).exp())
    }

    fn killed_weight(&self, s: i64) -> f64 {
        match self.star {
            Some(star) => (star.lambda_star * s as f64).exp(),
            None => 0.0,
        }
    }

    /// Depth-first walk of the living subtree of a root at `root_pos >= 0`.
    fn explore_killed<E: Expander>(
        &self,
        expander: &mut E,
        root_pos: i64,
        root_key: u64,
        max_nodes: u64,
    ) -> KilledStats {
        let mut st = KilledStats {
            z: 1,
            best: root_pos,
            isolated: true,
            explored: 1,
            levels: vec![0; self.level_count],
            ..KilledStats::default()
        };
        if let Some(first) = st.levels.first_mut() {
            *first = 1;
        }
        let mut buf: Vec<i64> = Vec::new();
        let mut frames: Vec<Frame> = Vec::new();
        let mut next_id = 1u64;

        expander.expand(root_key, &mut buf);
        frames.push(Frame {
            pos: root_pos,
            key: root_key,
            id: 0,
            start: 0,
            next: 0,
            end: buf.len(),
        });

        while let Some(top) = frames.last_mut() {
            if top.next == top.end {
                buf.truncate(top.start);
                frames.pop();
                continue;
            }
            let index = (top.next - top.start) as u32;
            let pos = top.pos + buf[top.next];
            let key = child_key(top.key, index);
            top.next += 1;
            st.explored += 1;
            // strict negativity kills; the node and its subtree are dropped
            if pos < 0 {
                st.unexplored_weight += self.killed_weight(pos);
                continue;
            }
            if st.z == max_nodes {
                st.truncated = true;
                st.unexplored_weight += self.killed_weight(pos);
                break;
            }
            st.z += 1;
            let generation = frames.len() as u32;
            debug_assert!(frames.iter().all(|f| f.pos >= 0));
            if let Some(level) = st.levels.get_mut(generation as usize) {
                *level += 1;
            }
            st.depth = st.depth.max(generation);
            let id = next_id;
            next_id += 1;
            match pos.cmp(&st.best) {
                Ordering::Greater => {
                    st.best = pos;
                    st.best_generation = generation;
                    st.min_generation_at_best = generation;
                    st.isolated = true;
                    st.best_id = id;
                }
                Ordering::Equal => {
                    st.min_generation_at_best = st.min_generation_at_best.min(generation);
                    let g = st.best_generation as usize;
                    let descends = g < generation as usize && frames[g].id == st.best_id;
                    if !descends {
                        st.isolated = false;
                    }
                }
                Ordering::Less => {}
            }
            let start = buf.len();
            let k = expander.expand(key, &mut buf);
            if k > 0 && generation >= self.limits.max_depth {
                st.truncated = true;
                for &x in &buf[start..] {
                    st.unexplored_weight += self.killed_weight(pos + x);
                }
                buf.truncate(start);
            }
            frames.push(Frame {
                pos,
                key,
                id,
                start,
                next: start,
                end: buf.len(),
            });
        }
        if st.truncated {
            for f in &frames {
                for &x in &buf[f.next..f.end] {
                    st.unexplored_weight += self.killed_weight(f.pos + x);
                }
            }
        }
        st
    }

    fn record(&self, trial: u64, st: KilledStats) -> TrialRecord {
        TrialRecord {
            trial,
            z: st.z,
            m_living: st.best,
            m_all: st.best,
            prune_bias_bound: self.bias_from_weight(st.unexplored_weight, st.best),
            depth: st.depth,
            truncated: st.truncated,
            nodes_explored: st.explored,
            max_generation: st.min_generation_at_best,
            max_isolated: st.isolated,
            levels: st.levels,
            budget_exceeded: false,
        }
    }

    /// One killed tree drawn from `rng` in depth-first order.
    pub fn simulate_killed_tree(&self, trial: u64, rng: &mut TrialRng) -> TrialRecord {
        let mut expander = StreamExpander {
            rng,
            steps: &self.steps,
            counts: &self.counts,
        };
        let st = self.explore_killed(&mut expander, 0, 0, self.limits.max_nodes);
        self.record(trial, st)
    }

    fn keyed(&self, rng: &mut TrialRng) -> KeyedExpander<'_> {
        KeyedExpander {
            seed: rng.gen(),
            steps: &self.steps,
            counts: &self.counts,
        }
    }

    /// Best-first search of the un-killed tree for its maximum `M̄`.
    ///
    /// Stops early once the maximum reaches `target_k`. When the frontier
    /// outgrows its budget the partial outcome comes back inside
    /// [`EngineError::BudgetExceeded`].
    pub fn explore_unkilled_max(
        &self,
        rng: &mut TrialRng,
        target_k: Option<i64>,
        prune: PruneConfig,
    ) -> Result<MaxOutcome, EngineError> {
        let mut expander = self.keyed(rng);
        self.best_first(&mut expander, 0, target_k, prune)
    }

    fn best_first(
        &self,
        expander: &mut KeyedExpander<'_>,
        floor: i64,
        target_k: Option<i64>,
        prune: PruneConfig,
    ) -> Result<MaxOutcome, EngineError> {
        // no positive step: the root is the maximum
        if self.step.max_step() <= 0 {
            return Ok(MaxOutcome {
                m_all: floor.max(0),
                bias_bound: 0.0,
                expanded: 0,
                frontier_peak: 0,
                reached_target: target_k.is_some_and(|k| k <= 0),
                certified: true,
            });
        }
        let star = self.star.ok_or_else(|| {
            EngineError::NotWellControlled("un-killed exploration needs λ*".into())
        })?;
        let lambda = star.lambda_star;
        let threshold = prune.eps / prune.frontier_budget.max(1) as f64;
        let mut heap: BinaryHeap<(i64, Reverse<u64>, u64)> = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push((0, Reverse(seq), 0));
        let mut best = floor.max(0);
        let mut expanded = 0u64;
        let mut peak = 1usize;
        let mut buf = Vec::new();
        let mut reached = target_k.is_some_and(|k| best >= k);
        let mut exceeded = false;

        while let Some(&(s, _, key)) = heap.peek() {
            if reached {
                break;
            }
            if (-lambda * (best + 1 - s) as f64).exp() <= threshold {
                break;
            }
            heap.pop();
            buf.clear();
            expander.expand(key, &mut buf);
            expanded += 1;
            for (i, &x) in buf.iter().enumerate() {
                let child = s + x;
                best = best.max(child);
                seq += 1;
                heap.push((child, Reverse(seq), child_key(key, i as u32)));
            }
            peak = peak.max(heap.len());
            if target_k.is_some_and(|k| best >= k) {
                reached = true;
            }
            if heap.len() > prune.frontier_budget {
                exceeded = true;
                break;
            }
        }
        let weight: f64 = heap.iter().map(|&(s, _, _)| (lambda * (s - best - 1) as f64).exp()).sum();
        let outcome = MaxOutcome {
            m_all: best,
            bias_bound: weight,
            expanded,
            frontier_peak: peak,
            reached_target: reached,
            certified: self.certified,
        };
        if exceeded {
            Err(EngineError::BudgetExceeded { partial: outcome })
        } else {
            Ok(outcome)
        }
    }

    /// A killed tree together with the maximum of the whole un-killed tree,
    /// both read off one keyed realization.
    pub fn simulate_maxbar(&self, trial: u64, rng: &mut TrialRng, prune: PruneConfig) -> TrialRecord {
        let mut expander = self.keyed(rng);
        let st = self.explore_killed(&mut expander, 0, 0, self.limits.max_nodes);
        let mut record = self.record(trial, st);
        let outcome = match self.best_first(&mut expander, record.m_living, None, prune) {
            Ok(o) => o,
            Err(EngineError::BudgetExceeded { partial }) => {
                record.budget_exceeded = true;
                partial
            }
            Err(_) => {
                // not well-controlled: only the killed part is known
                record.prune_bias_bound = None;
                return record;
            }
        };
        // the search starts from m_living, so its maximum already covers it
        record.m_all = outcome.m_all;
        record.prune_bias_bound = self.certified.then_some(outcome.bias_bound);
        record
    }

    /// The spine `v_0, ..., v_n` of the size-biased tree.
    ///
    /// Spine steps follow the original step law; only offspring counts are
    /// size-biased. With `offspine_budget`, the living subtrees hanging off each
    /// living spine node are explored (killed at 0) within that many nodes in total.
    pub fn simulate_spine(
        &self,
        rng: &mut TrialRng,
        n: usize,
        offspine_budget: Option<u64>,
    ) -> Result<SpineTrial, EngineError> {
        let off_spine = self.off_spine.as_ref().ok_or_else(|| {
            EngineError::BadLimits("size-biasing needs E B > 0".into())
        })?;
        let mut positions = Vec::with_capacity(n + 1);
        positions.push(0i64);
        for i in 0..n {
            positions.push(positions[i] + self.steps.sample(rng));
        }
        let alive_upto = positions.iter().take_while(|&&s| s >= 0).count();
        let spine_alive = alive_upto == n + 1;
        let offspring_counts: Vec<u32> = (0..=n).map(|_| off_spine.sample(rng)).collect();

        let off_spine_max = match offspine_budget {
            None => None,
            Some(budget) => {
                let mut remaining = budget;
                let mut maxima = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    if i >= alive_upto {
                        maxima.push(None);
                        continue;
                    }
                    let base = positions[i];
                    let mut best = 0i64;
                    for _ in 0..offspring_counts[i] {
                        let child = base + self.steps.sample(rng);
                        if child < 0 {
                            continue;
                        }
                        if remaining == 0 {
                            return Err(EngineError::OffSpineBudget(budget));
                        }
                        let mut expander = StreamExpander {
                            rng,
                            steps: &self.steps,
                            counts: &self.counts,
                        };
                        let st = self.explore_killed(&mut expander, child, 0, remaining);
                        if st.truncated {
                            return Err(EngineError::OffSpineBudget(budget));
                        }
                        remaining -= st.z;
                        best = best.max(st.best - base);
                    }
                    maxima.push(Some(best));
                }
                Some(maxima)
            }
        };
        Ok(SpineTrial {
            spine_positions: positions,
            spine_alive,
            offspring_counts,
            off_spine_max,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RngContract;

    /// Hands out scripted child steps in visiting order.
    struct Script(std::collections::VecDeque<Vec<i64>>);

    impl Expander for Script {
        fn expand(&mut self, _key: u64, out: &mut Vec<i64>) -> u32 {
            let children = self.0.pop_front().unwrap_or_default();
            out.extend(&children);
            children.len() as u32
        }
    }

    fn scripted(tree: &[&[i64]]) -> KilledStats {
        let sim = Simulator::new(
            StepLaw::pemantle(),
            OffspringLaw::constant(2),
            Limits::default(),
        )
        .unwrap()
        .with_level_count(4);
        let mut script = Script(tree.iter().map(|c| c.to_vec()).collect());
        sim.explore_killed(&mut script, 0, 0, 100)
    }

    fn pemantle_sim() -> Simulator {
        Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default()).unwrap()
    }

    #[test]
    fn isolated_maximum_is_tracked() {
        // root -> (1, killed); (1) -> (1, 2)
        let st = scripted(&[&[1, -1], &[0, 1], &[], &[]]);
        assert_eq!((st.z, st.best, st.min_generation_at_best, st.isolated), (4, 2, 2, true));
        assert_eq!(st.levels, vec![1, 1, 2, 0]);
        // root -> (1, 1): two separate nodes at the maximum
        let st = scripted(&[&[1, 1], &[], &[]]);
        assert_eq!((st.best, st.min_generation_at_best, st.isolated), (1, 1, false));
        // root -> (2, 1); second child -> (+1): same height, different branch
        let st = scripted(&[&[2, 1], &[], &[1], &[]]);
        assert_eq!((st.best, st.min_generation_at_best, st.isolated), (2, 1, false));
        // root -> (1, 1); second child -> (+1): a new maximum in one branch
        let st = scripted(&[&[1, 1], &[], &[1], &[]]);
        assert_eq!((st.best, st.min_generation_at_best, st.isolated), (2, 2, true));
        // the maximum's own descendant reaching it again keeps it isolated
        let st = scripted(&[&[1], &[1], &[0, -1], &[], &[]]);
        assert_eq!((st.best, st.isolated), (2, true));
    }

    #[test]
    fn killed_children_are_not_counted() {
        let st = scripted(&[&[-1, -1]]);
        assert_eq!((st.z, st.best, st.depth, st.explored), (1, 0, 0, 3));
        assert!(st.unexplored_weight > 0.0);
    }

    #[test]
    fn degenerate_trees() {
        let sim = Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(0), Limits::default())
            .unwrap();
        let r = sim.simulate_killed_tree(0, &mut RngContract::new(1, 0).generator());
        assert_eq!((r.z, r.m_living, r.depth), (1, 0, 0));
        let down: StepLaw = "-1:1".parse().unwrap();
        let sim = Simulator::new(down, OffspringLaw::constant(2), Limits::default()).unwrap();
        let r = sim.simulate_killed_tree(0, &mut RngContract::new(1, 0).generator());
        assert_eq!((r.z, r.m_living, r.max_generation, r.max_isolated), (1, 0, 0, true));
        let m = sim
            .explore_unkilled_max(&mut RngContract::new(1, 0).generator(), None, PruneConfig::default())
            .unwrap();
        assert_eq!((m.m_all, m.bias_bound), (0, 0.0));
    }

    #[test]
    fn limits_must_be_positive() {
        let bad = Limits {
            max_nodes: 0,
            max_depth: 5,
        };
        assert!(Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), bad).is_err());
    }

    #[test]
    fn truncation_censors_and_bounds() {
        let limits = Limits {
            max_nodes: 5,
            max_depth: 1000,
        };
        let up: StepLaw = "1:1".parse().unwrap();
        let sim = Simulator::new(up, OffspringLaw::constant(2), limits).unwrap();
        let r = sim.simulate_killed_tree(0, &mut RngContract::new(1, 0).generator());
        assert!(r.truncated);
        assert_eq!(r.z, 5);
        let limits = Limits {
            max_nodes: 1000,
            max_depth: 3,
        };
        let up: StepLaw = "1:1".parse().unwrap();
        let sim = Simulator::new(up, OffspringLaw::constant(2), limits).unwrap();
        let r = sim.simulate_killed_tree(0, &mut RngContract::new(1, 0).generator());
        assert!(r.truncated);
        assert_eq!((r.z, r.depth), (15, 3));
    }

    #[test]
    fn single_node_frequency() {
        let sim = pemantle_sim();
        let n = 200_000u64;
        let ones = (0..n)
            .filter(|&i| sim.simulate_killed_tree(i, &mut RngContract::new(5, i).generator()).z == 1)
            .count();
        let p = (2.0 - 3f64.sqrt()) / 4.0;
        let q = (1.0 - p) * (1.0 - p);
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - q).abs() < 3.0 * se);
    }

    #[test]
    fn spine_basics() {
        let sim = pemantle_sim();
        let mut rng = RngContract::new(3, 0).generator();
        let s = sim.simulate_spine(&mut rng, 0, None).unwrap();
        assert!(s.spine_alive);
        assert_eq!(s.spine_positions, vec![0]);
        let n = 100_000u64;
        let mut alive = 0;
        for i in 0..n {
            let s = sim
                .simulate_spine(&mut RngContract::new(9, i).generator(), 1, None)
                .unwrap();
            assert!(s.offspring_counts.iter().all(|&c| c == 1));
            alive += s.spine_alive as u64;
        }
        let p = (2.0 - 3f64.sqrt()) / 4.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((alive as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn off_spine_maxima() {
        let sim = pemantle_sim();
        for i in 0..200 {
            let s = sim
                .simulate_spine(&mut RngContract::new(4, i).generator(), 10, Some(1_000_000))
                .unwrap();
            let maxima = s.off_spine_max.unwrap();
            assert_eq!(maxima.len(), 11);
            for (j, m) in maxima.iter().enumerate() {
                let living = s.spine_positions[..=j].iter().all(|&x| x >= 0);
                assert_eq!(m.is_some(), living);
                assert!(m.map_or(true, |v| v >= 0));
            }
        }
    }

    #[test]
    fn unkilled_max_respects_tail_bound() {
        let sim = pemantle_sim();
        let prune = PruneConfig {
            eps: 1e-3,
            frontier_budget: 10_000,
        };
        let n = 20_000u64;
        let (mut hits, mut bias) = (0u64, 0.0);
        for i in 0..n {
            let mut rng = RngContract::new(21, i).generator();
            let m = match sim.explore_unkilled_max(&mut rng, Some(1), prune) {
                Ok(m) => m,
                Err(EngineError::BudgetExceeded { partial }) => partial,
                Err(e) => panic!("{e}"),
            };
            hits += (m.m_all >= 1) as u64;
            bias += m.bias_bound.min(1.0);
        }
        let bound = 2.0 - 3f64.sqrt();
        let freq = hits as f64 / n as f64;
        let se = (bound * (1.0 - bound) / n as f64).sqrt();
        assert!(freq <= bound + 3.0 * se + bias / n as f64, "{freq} vs {bound}");
    }

    #[test]
    fn unpruned_supercritical_exploration_exhausts_budget() {
        let sim = Simulator::new(
            StepLaw::plus_minus_one(0.2).unwrap(),
            OffspringLaw::constant(2),
            Limits::default(),
        )
        .unwrap();
        assert!(!sim.certified());
        let prune = PruneConfig {
            eps: 0.0,
            frontier_budget: 1000,
        };
        let r = sim.explore_unkilled_max(&mut RngContract::new(1, 1).generator(), None, prune);
        assert!(matches!(r, Err(EngineError::BudgetExceeded { .. })));
    }

    #[test]
    fn maxbar_extends_the_living_maximum() {
        let sim = Simulator::new(
            StepLaw::plus_minus_one(0.02).unwrap(),
            OffspringLaw::constant(2),
            Limits::default(),
        )
        .unwrap();
        assert!(sim.certified());
        for i in 0..500 {
            let r = sim.simulate_maxbar(i, &mut RngContract::new(2, i).generator(), PruneConfig::default());
            assert!(r.m_all >= r.m_living);
            assert!(!r.budget_exceeded);
            assert!(r.prune_bias_bound.unwrap() <= 1e-6 * 1.000001);
        }
    }

    #[test]
    fn records_are_reproducible() {
        let sim = pemantle_sim().with_level_count(5);
        let a: Vec<_> = (0..200)
            .map(|i| sim.simulate_killed_tree(i, &mut RngContract::new(8, i).generator()))
            .collect();
        let b: Vec<_> = (0..200)
            .map(|i| sim.simulate_killed_tree(i, &mut RngContract::new(8, i).generator()))
            .collect();
        assert_eq!(a, b);
    }
}
