//! The strike-out protocol: parties alternately eliminate candidate strings
//! until one survivor remains.
//!
//! Game states are survivor sets (bitmasks over the `2^n` strings), not
//! paths: the future depends only on who moves and which strings survive,
//! so backward induction memoizes on the mask. Alice strikes first and the
//! parties alternate strictly; with an even number of strings the mover is
//! determined by the parity of the survivor count.

use std::collections::BTreeMap;

use super::{ClassicalError, GameForm, GameNode, Party, ProtocolTree};

const STRIKEOUT_LIMIT: usize = 4;

/// The strike-out game over `2^n` strings in subset-state form.
pub struct StrikeOutGame {
    n_bits: usize,
    num_strings: usize,
    ordered_states: Vec<u32>,
}

/// Builds the strike-out protocol for `1 <= n <= 4`.
pub fn build_strikeout(n: usize) -> Result<ProtocolTree, ClassicalError> {
    if n == 0 || n > STRIKEOUT_LIMIT {
        return Err(ClassicalError::TooLarge {
            n,
            limit: STRIKEOUT_LIMIT,
            what: "exact strike-out analysis",
        });
    }
    let num_strings = 1usize << n;
    let full = (1u64 << num_strings) - 1;
    let mut ordered_states: Vec<u32> = (1..=full).map(|m| m as u32).collect();
    ordered_states.sort_by_key(|m| (m.count_ones(), *m));
    Ok(ProtocolTree::StrikeOut(StrikeOutGame {
        n_bits: n,
        num_strings,
        ordered_states,
    }))
}

impl StrikeOutGame {
    fn survivors(mask: u32) -> impl Iterator<Item = usize> {
        (0..32usize).filter(move |&j| mask & (1 << j) != 0)
    }

    fn mover(mask: u32) -> Party {
        // Alice strikes first from the full (even-sized) set and the
        // parties alternate, so Alice moves exactly at even survivor counts.
        if mask.count_ones() % 2 == 0 {
            Party::Alice
        } else {
            Party::Bob
        }
    }
}

impl GameForm for StrikeOutGame {
    type State = u32;

    fn root(&self) -> u32 {
        ((1u64 << self.num_strings) - 1) as u32
    }

    fn expand(&self, mask: u32) -> GameNode<u32> {
        let count = mask.count_ones() as usize;
        if count == 1 {
            return GameNode::Leaf {
                output: mask.trailing_zeros() as usize,
            };
        }
        // Honest strikes are uniform over the survivors, listed in string
        // order.
        let p = 1.0 / count as f64;
        let moves = Self::survivors(mask)
            .map(|j| (p, mask & !(1u32 << j)))
            .collect();
        GameNode::Internal {
            mover: Self::mover(mask),
            moves,
        }
    }

    fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn states_bottom_up(&self) -> Vec<u32> {
        self.ordered_states.clone()
    }

    fn output_symmetric(&self) -> bool {
        // Honest strikes are uniform, so any permutation of the strings
        // maps the game to itself.
        true
    }

    fn greedy_init(&self, cheater: Party) -> BTreeMap<u32, usize> {
        // Rank preference: prefer lexicographically small strings, so
        // always strike the largest survivor (the least favorite).
        let mut init = BTreeMap::new();
        for &mask in &self.ordered_states {
            if mask.count_ones() >= 2 && Self::mover(mask) == cheater {
                init.insert(mask, mask.count_ones() as usize - 1);
            }
        }
        init
    }

    fn state_label(&self, mask: u32) -> String {
        let strings: Vec<String> = Self::survivors(mask)
            .map(|j| format!("{j:0width$b}", width = self.n_bits))
            .collect();
        format!("{{{}}}", strings.join(","))
    }

    fn choice_label(&self, mask: u32, choice: usize) -> String {
        match Self::survivors(mask).nth(choice) {
            Some(j) => format!("strike {j:0width$b}", width = self.n_bits),
            None => "invalid".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::EntropyMethod;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_oversized_n() {
        assert!(build_strikeout(5).is_err());
        assert!(build_strikeout(0).is_err());
    }

    #[test]
    fn single_bit_game_lets_alice_fix_the_outcome() {
        // Two strings, one strike, by Alice: she fully determines the
        // survivor, so Bob's output entropy collapses to zero.
        let game = build_strikeout(1).unwrap();
        let hmin = game
            .min_shannon_entropy(Party::Alice, EntropyMethod::Exhaustive)
            .unwrap();
        assert_abs_diff_eq!(hmin.entropy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(game.max_string_prob(Party::Alice, 0), 1.0, epsilon = 1e-12);
        // Bob never moves at all.
        assert_abs_diff_eq!(game.max_string_prob(Party::Bob, 0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn honest_play_is_uniform() {
        for n in 1..=3 {
            let game = build_strikeout(n).unwrap();
            let dist = game.honest_distribution();
            for &p in &dist {
                assert_abs_diff_eq!(p, 1.0 / (1 << n) as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_bit_exhaustive_entropy_is_h_one_third() {
        // Cheating Alice strikes her least favorite survivor; the honest
        // oracle over all 32 reachable profiles lands on h(1/3).
        let game = build_strikeout(2).unwrap();
        let exact = game
            .min_shannon_entropy(Party::Alice, EntropyMethod::Exhaustive)
            .unwrap();
        let h_one_third = -(2.0 / 3.0f64) * (2.0 / 3.0f64).log2() - (1.0 / 3.0f64) * (1.0 / 3.0f64).log2();
        assert_abs_diff_eq!(exact.entropy, h_one_third, epsilon = 1e-12);
        assert_eq!(exact.method, "exhaustive");

        // The local search from the rank-preference start matches the
        // exhaustive oracle here.
        let greedy = game
            .min_shannon_entropy(Party::Alice, EntropyMethod::GreedyLocal)
            .unwrap();
        assert_abs_diff_eq!(greedy.entropy, h_one_third, epsilon = 1e-9);
    }

    #[test]
    fn profile_counts_match_hand_enumeration() {
        let game = build_strikeout(2).unwrap();
        // Alice: 4 first strikes, then 3 Bob branches with 2 choices each.
        assert_abs_diff_eq!(game.profile_count(Party::Alice), 32.0, epsilon = 0.0);
        // Bob: independent choices at the 4 states Alice can hand him.
        assert_abs_diff_eq!(game.profile_count(Party::Bob), 81.0, epsilon = 0.0);
    }
}
