//! Generic backward-induction engines over game forms.

use std::collections::{BTreeMap, HashMap};

use super::{
    shannon_entropy, ClassicalError, EntropyMethod, EntropyMinimization, GameForm, GameNode,
    Party, StrategyDecision,
};

const EXHAUSTIVE_PROFILE_LIMIT: u64 = 100_000;
const LOCAL_SEARCH_ITERATION_CAP: u64 = 50_000;

fn match_fraction(output: usize, c: usize, n: usize) -> f64 {
    let disagreements = (output ^ c).count_ones() as usize;
    (n - disagreements) as f64 / n as f64
}

fn value_rec<G: GameForm>(
    g: &G,
    s: G::State,
    cheater: Party,
    leaf_value: &impl Fn(usize) -> f64,
    memo: &mut HashMap<G::State, f64>,
) -> f64 {
    if let Some(&v) = memo.get(&s) {
        return v;
    }
    let v = match g.expand(s) {
        GameNode::Leaf { output } => leaf_value(output),
        GameNode::Internal { mover, moves } => {
            if mover == cheater {
                moves
                    .iter()
                    .map(|&(_, t)| value_rec(g, t, cheater, leaf_value, memo))
                    .fold(f64::NEG_INFINITY, f64::max)
            } else {
                moves
                    .iter()
                    .map(|&(p, t)| p * value_rec(g, t, cheater, leaf_value, memo))
                    .sum()
            }
        }
    };
    memo.insert(s, v);
    v
}

/// Cheater-optimal expected match fraction against target `c`.
pub(crate) fn match_value<G: GameForm>(g: &G, cheater: Party, c: usize) -> f64 {
    let n = g.n_bits();
    let mut memo = HashMap::new();
    value_rec(g, g.root(), cheater, &|out| match_fraction(out, c, n), &mut memo)
}

/// Cheater-optimal probability of the exact output `c` (the Z-function at
/// the root).
pub(crate) fn string_prob<G: GameForm>(g: &G, cheater: Party, c: usize) -> f64 {
    string_prob_at(g, cheater, c, g.root())
}

/// The Z-function evaluated at an arbitrary state.
pub(crate) fn string_prob_at<G: GameForm>(
    g: &G,
    cheater: Party,
    c: usize,
    s: G::State,
) -> f64 {
    let mut memo = HashMap::new();
    value_rec(
        g,
        s,
        cheater,
        &|out| if out == c { 1.0 } else { 0.0 },
        &mut memo,
    )
}

/// Best bias over all target strings. Enumerates targets for `n <= 4`; for
/// output-symmetric games every target is equivalent to all-zeros.
pub(crate) fn average_bias<G: GameForm>(g: &G, cheater: Party) -> Result<f64, ClassicalError> {
    let n = g.n_bits();
    if g.output_symmetric() {
        return Ok(match_value(g, cheater, 0) - 0.5);
    }
    if n > 4 {
        return Err(ClassicalError::BiasEnumerationTooLarge(n));
    }
    let best = (0..(1usize << n))
        .map(|c| match_value(g, cheater, c))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best - 0.5)
}

/// `-log2` of the best per-string probability over all targets.
pub(crate) fn min_entropy_bits<G: GameForm>(g: &G, cheater: Party) -> Result<f64, ClassicalError> {
    let n = g.n_bits();
    if g.output_symmetric() {
        return Ok(-string_prob(g, cheater, 0).log2());
    }
    if n > 4 {
        return Err(ClassicalError::BiasEnumerationTooLarge(n));
    }
    let best = (0..(1usize << n))
        .map(|c| string_prob(g, cheater, c))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(-best.log2())
}

/// Fills a memo with the Z-value of every state.
fn full_memo<G: GameForm>(g: &G, cheater: Party, c: usize) -> HashMap<G::State, f64> {
    let mut memo = HashMap::new();
    value_rec(
        g,
        g.root(),
        cheater,
        &|out| if out == c { 1.0 } else { 0.0 },
        &mut memo,
    );
    memo
}

/// The sequence `F_j = sum_{U in level j} w(U) Z^A_c(U) Z^B_c(U)`, where
/// `w` is the honest reach probability, `Z` with cheater Bob bounds Alice's
/// output and vice versa. Terminated protocols persist through later
/// levels, so the final entry is the honest probability of output `c`.
pub(crate) fn fj_sequence<G: GameForm>(g: &G, c: usize) -> Vec<f64> {
    let z_cheat_bob = full_memo(g, Party::Bob, c);
    let z_cheat_alice = full_memo(g, Party::Alice, c);
    let mut level: BTreeMap<G::State, f64> = BTreeMap::new();
    level.insert(g.root(), 1.0);
    let mut out = Vec::new();
    loop {
        let fj: f64 = level
            .iter()
            .map(|(s, w)| w * z_cheat_bob[s] * z_cheat_alice[s])
            .sum();
        out.push(fj);
        let mut next: BTreeMap<G::State, f64> = BTreeMap::new();
        let mut any_internal = false;
        for (&s, &w) in &level {
            match g.expand(s) {
                GameNode::Leaf { .. } => {
                    *next.entry(s).or_insert(0.0) += w;
                }
                GameNode::Internal { moves, .. } => {
                    any_internal = true;
                    for (p, t) in moves {
                        *next.entry(t).or_insert(0.0) += w * p;
                    }
                }
            }
        }
        if !any_internal {
            return out;
        }
        level = next;
    }
}

/// Output distribution when both parties play honestly.
pub(crate) fn honest_distribution<G: GameForm>(g: &G) -> Vec<f64> {
    let n = g.n_bits();
    let mut dist = vec![0.0; 1 << n];
    let mut stack = vec![(g.root(), 1.0)];
    while let Some((s, w)) = stack.pop() {
        match g.expand(s) {
            GameNode::Leaf { output } => dist[output] += w,
            GameNode::Internal { moves, .. } => {
                for (p, t) in moves {
                    stack.push((t, w * p));
                }
            }
        }
    }
    dist
}

type Strategy<S> = BTreeMap<S, usize>;

/// Number of deterministic cheater strategy profiles reachable given the
/// cheater's own earlier choices (honest branches multiply, cheater
/// branches add).
pub(crate) fn count_profiles<G: GameForm>(g: &G, cheater: Party) -> f64 {
    fn rec<G: GameForm>(
        g: &G,
        s: G::State,
        cheater: Party,
        memo: &mut HashMap<G::State, f64>,
    ) -> f64 {
        if let Some(&v) = memo.get(&s) {
            return v;
        }
        let v = match g.expand(s) {
            GameNode::Leaf { .. } => 1.0,
            GameNode::Internal { mover, moves } => {
                let children = moves.iter().map(|&(_, t)| rec(g, t, cheater, memo));
                if mover == cheater {
                    children.sum()
                } else {
                    children.product()
                }
            }
        };
        memo.insert(s, v);
        v
    }
    rec(g, g.root(), cheater, &mut HashMap::new())
}

/// Enumerates every deterministic cheater strategy as (induced honest-party
/// distribution, decisions) pairs. Only valid for true trees and for game
/// DAGs where no state is reachable through two honest branches of one
/// profile (which holds for everything the profile gate admits).
fn enumerate_profiles<G: GameForm>(
    g: &G,
    cheater: Party,
    s: G::State,
) -> Vec<(Vec<f64>, Strategy<G::State>)> {
    let n = g.n_bits();
    match g.expand(s) {
        GameNode::Leaf { output } => {
            let mut dist = vec![0.0; 1 << n];
            dist[output] = 1.0;
            vec![(dist, Strategy::new())]
        }
        GameNode::Internal { mover, moves } if mover == cheater => {
            let mut out = Vec::new();
            for (k, (_, t)) in moves.iter().enumerate() {
                for (dist, mut strat) in enumerate_profiles(g, cheater, *t) {
                    strat.insert(s, k);
                    out.push((dist, strat));
                }
            }
            out
        }
        GameNode::Internal { moves, .. } => {
            let mut acc: Vec<(Vec<f64>, Strategy<G::State>)> =
                vec![(vec![0.0; 1 << n], Strategy::new())];
            for (p, t) in moves {
                let child = enumerate_profiles(g, cheater, t);
                let mut next = Vec::with_capacity(acc.len() * child.len());
                for (dist, strat) in &acc {
                    for (child_dist, child_strat) in &child {
                        let mut dist = dist.clone();
                        for (d, cd) in dist.iter_mut().zip(child_dist) {
                            *d += p * cd;
                        }
                        let mut strat = strat.clone();
                        for (k, v) in child_strat {
                            let previous = strat.insert(*k, *v);
                            debug_assert!(previous.is_none() || previous == Some(*v));
                        }
                        next.push((dist, strat));
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Honest reach probability of every state under a fixed cheater strategy.
fn reach_probabilities<G: GameForm>(
    g: &G,
    cheater: Party,
    strategy: &Strategy<G::State>,
    order: &[G::State],
) -> HashMap<G::State, f64> {
    let mut reach: HashMap<G::State, f64> = HashMap::new();
    reach.insert(g.root(), 1.0);
    for &s in order.iter().rev() {
        let w = match reach.get(&s) {
            Some(&w) if w > 0.0 => w,
            _ => continue,
        };
        if let GameNode::Internal { mover, moves } = g.expand(s) {
            if mover == cheater {
                let k = strategy[&s];
                *reach.entry(moves[k].1).or_insert(0.0) += w;
            } else {
                for (p, t) in moves {
                    *reach.entry(t).or_insert(0.0) += w * p;
                }
            }
        }
    }
    reach
}

/// Subtree output distribution of every state under a fixed cheater
/// strategy, children before parents.
fn subtree_distributions<G: GameForm>(
    g: &G,
    cheater: Party,
    strategy: &Strategy<G::State>,
    order: &[G::State],
) -> HashMap<G::State, Vec<f64>> {
    let n = g.n_bits();
    let mut dists: HashMap<G::State, Vec<f64>> = HashMap::with_capacity(order.len());
    for &s in order {
        let dist = match g.expand(s) {
            GameNode::Leaf { output } => {
                let mut d = vec![0.0; 1 << n];
                d[output] = 1.0;
                d
            }
            GameNode::Internal { mover, moves } => {
                if mover == cheater {
                    dists[&moves[strategy[&s]].1].clone()
                } else {
                    let mut d = vec![0.0; 1 << n];
                    for (p, t) in moves {
                        for (acc, v) in d.iter_mut().zip(&dists[&t]) {
                            *acc += p * v;
                        }
                    }
                    d
                }
            }
        };
        dists.insert(s, dist);
    }
    dists
}

/// Single-decision local search from the given starting strategy. Each step
/// applies the decision change that lowers the honest party's output
/// entropy the most; the entropy of a candidate flip is exact because a
/// state's reach probability does not depend on the decision taken at it.
fn greedy_local<G: GameForm>(
    g: &G,
    cheater: Party,
    mut strategy: Strategy<G::State>,
) -> (f64, Strategy<G::State>, u64) {
    let order = g.states_bottom_up();
    let mut iterations = 0u64;
    loop {
        let reach = reach_probabilities(g, cheater, &strategy, &order);
        let dists = subtree_distributions(g, cheater, &strategy, &order);
        let global = &dists[&g.root()];
        let current_entropy = shannon_entropy(global);

        let mut best: Option<(f64, G::State, usize)> = None;
        // Fixed iteration order keeps the search deterministic.
        for &s in &order {
            let w = match reach.get(&s) {
                Some(&w) if w > 0.0 => w,
                _ => continue,
            };
            let GameNode::Internal { mover, moves } = g.expand(s) else {
                continue;
            };
            if mover != cheater {
                continue;
            }
            let chosen = strategy[&s];
            let chosen_dist = &dists[&moves[chosen].1];
            for (k, (_, t)) in moves.iter().enumerate() {
                if k == chosen {
                    continue;
                }
                let alt = &dists[t];
                let candidate: Vec<f64> = global
                    .iter()
                    .zip(chosen_dist.iter().zip(alt))
                    .map(|(&gl, (&old, &new))| (gl + w * (new - old)).max(0.0))
                    .collect();
                let h = shannon_entropy(&candidate);
                if h < current_entropy - 1e-12 && best.as_ref().map_or(true, |&(bh, _, _)| h < bh)
                {
                    best = Some((h, s, k));
                }
            }
        }
        match best {
            Some((_, s, k)) if iterations < LOCAL_SEARCH_ITERATION_CAP => {
                strategy.insert(s, k);
                iterations += 1;
            }
            _ => {
                return (current_entropy, strategy, iterations);
            }
        }
    }
}

/// Restricts a strategy to the states it actually reaches and renders it as
/// a decision table.
fn certificate<G: GameForm>(
    g: &G,
    cheater: Party,
    strategy: &Strategy<G::State>,
) -> Vec<StrategyDecision> {
    let order = g.states_bottom_up();
    let reach = reach_probabilities(g, cheater, strategy, &order);
    let mut rows: Vec<(G::State, usize)> = strategy
        .iter()
        .filter(|(s, _)| reach.get(s).copied().unwrap_or(0.0) > 0.0)
        .map(|(&s, &k)| (s, k))
        .collect();
    rows.sort();
    rows.into_iter()
        .map(|(s, k)| StrategyDecision {
            state: g.state_label(s),
            choice: g.choice_label(s, k),
        })
        .collect()
}

/// Minimal Shannon entropy of the honest party's output over deterministic
/// cheater strategies. Deterministic strategies suffice: the achievable
/// distributions form a polytope whose vertices are deterministic, and
/// entropy is concave, so its minimum sits at a vertex.
pub(crate) fn min_shannon_entropy<G: GameForm>(
    g: &G,
    cheater: Party,
    method: EntropyMethod,
) -> Result<EntropyMinimization, ClassicalError> {
    let profiles = count_profiles(g, cheater);
    let method = match method {
        EntropyMethod::Auto => {
            if profiles <= EXHAUSTIVE_PROFILE_LIMIT as f64 {
                EntropyMethod::Exhaustive
            } else {
                EntropyMethod::GreedyLocal
            }
        }
        m => m,
    };
    match method {
        EntropyMethod::Exhaustive => {
            if profiles > EXHAUSTIVE_PROFILE_LIMIT as f64 {
                return Err(ClassicalError::ExhaustiveTooBig {
                    profiles,
                    limit: EXHAUSTIVE_PROFILE_LIMIT,
                });
            }
            let mut best: Option<(f64, Strategy<G::State>)> = None;
            for (dist, strategy) in enumerate_profiles(g, cheater, g.root()) {
                let h = shannon_entropy(&dist);
                if best.as_ref().map_or(true, |(bh, _)| h < bh - 1e-15) {
                    best = Some((h, strategy));
                }
            }
            let (entropy, strategy) = best.expect("at least one profile exists");
            Ok(EntropyMinimization {
                entropy,
                method: "exhaustive".to_string(),
                iterations: 0,
                strategy: certificate(g, cheater, &strategy),
            })
        }
        EntropyMethod::GreedyLocal => {
            let init = g.greedy_init(cheater);
            let (entropy, strategy, iterations) = greedy_local(g, cheater, init);
            Ok(EntropyMinimization {
                entropy,
                method: "greedy_local".to_string(),
                iterations,
                strategy: certificate(g, cheater, &strategy),
            })
        }
        EntropyMethod::Auto => unreachable!("resolved above"),
    }
}
