//! Plurality voting with tie-as-error semantics.

use super::{Label, VoteOutcome};

/// Vote outcome from per-class counts: the unique class with the maximal
/// count, or `Tie` when the maximum is shared or no votes were cast.
pub fn vote_from_counts(counts: &[u32]) -> VoteOutcome {
    let mut best = 0u32;
    let mut winner = None;
    let mut shared = false;
    for (class, &c) in counts.iter().enumerate() {
        if c > best {
            best = c;
            winner = Some(class as u32);
            shared = false;
        } else if c == best && c > 0 {
            shared = true;
        }
    }
    match winner {
        Some(l) if !shared => VoteOutcome::Winner(Label(l)),
        _ => VoteOutcome::Tie,
    }
}

/// Plurality vote over a column of labels. An empty column is a tie.
pub fn plurality_vote(column: &[Label], k: u32) -> VoteOutcome {
    let mut counts = vec![0u32; k as usize];
    for l in column {
        counts[l.index()] += 1;
    }
    vote_from_counts(&counts)
}

/// Plurality vote restricted to the rows flagged in `mask_column`. An empty
/// restriction is a tie, same as the empty out-of-bag vote set.
pub fn oob_vote(column: &[Label], mask_column: &[bool], k: u32) -> VoteOutcome {
    debug_assert_eq!(column.len(), mask_column.len());
    let mut counts = vec![0u32; k as usize];
    for (l, &keep) in column.iter().zip(mask_column) {
        if keep {
            counts[l.index()] += 1;
        }
    }
    vote_from_counts(&counts)
}
