//! Exact cover-infimum search on finite spaces.
//!
//! The infimum defining the generated outer measure ranges over countable
//! covers, but on a finite universe it collapses to finite covers:
//! from any countable cover, picking one covering piece per target point
//! yields a finite subfamily that still covers, and dropping the rest can
//! only lower the sum since all values are nonnegative. The search below is
//! therefore a branch-and-bound over finite covers, restricted to
//! irredundant ones — each chosen piece covers the lowest currently
//! uncovered point — with memoization on the uncovered-point set. Ties are
//! broken by the lexicographically least family-index chain, never by
//! arrival order, so results are schedule-independent.

use std::collections::HashMap;

use crate::exact::ExtReal;

/// Memoized search state over one generating family.
pub(crate) struct CoverSearch<'a> {
    masks: &'a [u64],
    values: &'a [ExtReal],
    memo: HashMap<u64, Entry>,
    steps: u64,
    budget: u64,
}

#[derive(Clone)]
pub(crate) struct Entry {
    pub value: ExtReal,
    /// Family index of the first piece of the optimal chain; `None` when the
    /// target is empty or uncoverable.
    pub choice: Option<usize>,
}

pub(crate) enum SearchOutcome {
    /// Exact infimum with the optimal chain reconstructible via `chain`.
    Exact(Entry),
    /// Budget ran out; a greedy cover gives this certified upper bound.
    Bound { value: ExtReal, pieces: Vec<usize> },
    /// Some target point is in no family member: the infimum is infinite,
    /// exactly (no cover exists). This is decidable without search.
    Uncoverable,
}

impl<'a> CoverSearch<'a> {
    pub fn new(masks: &'a [u64], values: &'a [ExtReal], budget: u64) -> Self {
        CoverSearch {
            masks,
            values,
            memo: HashMap::new(),
            steps: 0,
            budget,
        }
    }

    pub fn solve(&mut self, target: u64) -> SearchOutcome {
        let coverable = self
            .masks
            .iter()
            .fold(0u64, |acc, &m| acc | m);
        if target & !coverable != 0 {
            return SearchOutcome::Uncoverable;
        }
        // cheap a-priori estimate: reachable states are submasks of target
        let est = (1u128 << target.count_ones().min(127))
            .saturating_mul(self.masks.len() as u128);
        if est > self.budget as u128 && self.exceeds_budget_probe(target) {
            let (value, pieces) = self.greedy(target);
            return SearchOutcome::Bound { value, pieces };
        }
        match self.best(target) {
            Some(entry) => SearchOutcome::Exact(entry),
            None => {
                let (value, pieces) = self.greedy(target);
                SearchOutcome::Bound { value, pieces }
            }
        }
    }

    /// Runs the memoized search with the step budget; `None` means the
    /// budget ran out mid-search (memo may be partial but never wrong).
    fn best(&mut self, target: u64) -> Option<Entry> {
        if target == 0 {
            return Some(Entry {
                value: ExtReal::zero(),
                choice: None,
            });
        }
        if let Some(e) = self.memo.get(&target) {
            return Some(e.clone());
        }
        let low = target & target.wrapping_neg();
        let mut best: Option<Entry> = None;
        for i in 0..self.masks.len() {
            if self.masks[i] & low == 0 {
                continue;
            }
            self.steps += 1;
            if self.steps > self.budget {
                return None;
            }
            let rest = self.best(target & !self.masks[i])?;
            let total = self.values[i].add(&rest.value);
            let better = match &best {
                None => true,
                Some(b) => total < b.value,
            };
            if better {
                best = Some(Entry {
                    value: total,
                    choice: Some(i),
                });
            }
        }
        let entry = best.unwrap_or(Entry {
            value: ExtReal::Infinity,
            choice: None,
        });
        self.memo.insert(target, entry.clone());
        Some(entry)
    }

    fn exceeds_budget_probe(&mut self, target: u64) -> bool {
        // the estimate is pessimistic; attempt the search anyway and let the
        // step counter decide
        self.best(target).is_none()
    }

    /// Reconstructs the optimal piece chain for a target already solved
    /// exactly.
    pub fn chain(&mut self, mut target: u64) -> Vec<usize> {
        let mut pieces = Vec::new();
        while target != 0 {
            let entry = self
                .best(target)
                .expect("chain requested for a target not solved exactly");
            match entry.choice {
                Some(i) => {
                    pieces.push(i);
                    target &= !self.masks[i];
                }
                None => break, // uncoverable tail; caller checks value
            }
        }
        pieces
    }

    /// Deterministic greedy cover: for the lowest uncovered point, take the
    /// (value, index)-least member containing it.
    fn greedy(&self, target: u64) -> (ExtReal, Vec<usize>) {
        let mut uncovered = target;
        let mut total = ExtReal::zero();
        let mut pieces = Vec::new();
        while uncovered != 0 {
            let low = uncovered & uncovered.wrapping_neg();
            let mut pick: Option<usize> = None;
            for i in 0..self.masks.len() {
                if self.masks[i] & low == 0 {
                    continue;
                }
                pick = match pick {
                    None => Some(i),
                    Some(j) if self.values[i] < self.values[j] => Some(i),
                    keep => keep,
                };
            }
            let i = pick.expect("coverability checked before greedy");
            total = total.add(&self.values[i]);
            pieces.push(i);
            uncovered &= !self.masks[i];
        }
        (total, pieces)
    }
}
