//! The four-way classification of a PUT from its per-row verdicts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    /// Passes on exactly the original rows.
    StronglyCoupled,
    /// Passes on every row.
    Decoupled,
    /// Passes on the originals and some, but not all, other rows.
    FalsifiablyCoupled,
    /// Fails on at least one original row.
    IllFormed,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::StronglyCoupled => "strongly-coupled",
            Category::Decoupled => "decoupled",
            Category::FalsifiablyCoupled => "falsifiably-coupled",
            Category::IllFormed => "ill-formed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    #[serde(skip)]
    pub put: String,
    pub category: Category,
    pub pass_rows: BTreeSet<usize>,
    pub original_rows: BTreeSet<usize>,
    #[serde(skip)]
    pub rows: usize,
    #[serde(skip)]
    pub errors: usize,
    #[serde(skip)]
    pub timeouts: usize,
}

/// Classifies one PUT. `outcomes[r]` is the verdict of row `r`; every
/// outcome other than `Pass` counts as not passing.
pub fn classify(put: &str, outcomes: &[Option<Outcome>], original_rows: &BTreeSet<usize>) -> Result<Classification> {
    let err = |message: String| Error::Classify {
        put: put.to_owned(),
        message,
    };
    if let Some(row) = outcomes.iter().position(Option::is_none) {
        return Err(err(format!("row {row} has no verdict")));
    }
    if original_rows.is_empty() {
        return Err(err("no original rows".into()));
    }
    if let Some(row) = original_rows.iter().find(|r| **r >= outcomes.len()) {
        return Err(err(format!("original row {row} is outside {} rows", outcomes.len())));
    }
    let pass_rows: BTreeSet<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| **o == Some(Outcome::Pass))
        .map(|(i, _)| i)
        .collect();
    let category = if !original_rows.is_subset(&pass_rows) {
        Category::IllFormed
    } else if pass_rows.len() == outcomes.len() {
        Category::Decoupled
    } else if pass_rows == *original_rows {
        Category::StronglyCoupled
    } else {
        Category::FalsifiablyCoupled
    };
    Ok(Classification {
        put: put.to_owned(),
        category,
        pass_rows,
        original_rows: original_rows.clone(),
        rows: outcomes.len(),
        errors: outcomes.iter().filter(|o| **o == Some(Outcome::Error)).count(),
        timeouts: outcomes.iter().filter(|o| **o == Some(Outcome::Timeout)).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn outcomes(rows: usize, pass: &[usize]) -> Vec<Option<Outcome>> {
        (0..rows)
            .map(|r| Some(if pass.contains(&r) { Outcome::Pass } else { Outcome::Fail }))
            .collect()
    }

    fn category(rows: usize, pass: &[usize], originals: &[usize]) -> Category {
        classify("p", &outcomes(rows, pass), &originals.iter().copied().collect()).unwrap().category
    }

    #[test]
    fn documented_cases() {
        assert_eq!(category(12, &[0, 8], &[0]), Category::FalsifiablyCoupled);
        assert_eq!(category(12, &(0..12).collect::<Vec<_>>(), &[0]), Category::Decoupled);
        assert_eq!(category(12, &[0], &[0]), Category::StronglyCoupled);
        assert_eq!(category(12, &[1, 2, 3], &[0]), Category::IllFormed);
        // A single-row provider that passes is decoupled before it is strongly coupled.
        assert_eq!(category(1, &[0], &[0]), Category::Decoupled);
    }

    #[test]
    fn errors_and_timeouts_do_not_pass_but_are_counted() {
        let o = vec![Some(Outcome::Pass), Some(Outcome::Error), Some(Outcome::Timeout), Some(Outcome::Pass)];
        let c = classify("p", &o, &BTreeSet::from([0])).unwrap();
        assert_eq!(c.category, Category::FalsifiablyCoupled);
        assert_eq!((c.errors, c.timeouts), (1, 1));
    }

    #[test]
    fn missing_verdicts_are_errors() {
        let o = vec![Some(Outcome::Pass), None];
        assert!(classify("p", &o, &BTreeSet::from([0])).is_err());
        assert!(classify("p", &outcomes(2, &[0]), &BTreeSet::new()).is_err());
        assert!(classify("p", &outcomes(2, &[0]), &BTreeSet::from([5])).is_err());
    }

    proptest! {
        #[test]
        fn permuting_rows_keeps_the_category(
            (rows, pass, orig, perm) in (1usize..30).prop_flat_map(|n| (
                Just(n),
                prop::collection::btree_set(0..n, 0..=n),
                prop::collection::btree_set(0..n, 1..=n.min(3)),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            ))
        ) {
            let pass: Vec<usize> = pass.into_iter().collect();
            let before = classify("p", &outcomes(rows, &pass), &orig).unwrap();
            let moved_pass: Vec<usize> = pass.iter().map(|r| perm[*r]).collect();
            let moved_orig: BTreeSet<usize> = orig.iter().map(|r| perm[*r]).collect();
            let after = classify("p", &outcomes(rows, &moved_pass), &moved_orig).unwrap();
            prop_assert_eq!(before.category, after.category);
            prop_assert_eq!(after.pass_rows, moved_pass.into_iter().collect::<BTreeSet<_>>());
        }

        #[test]
        fn falsifiable_coupling_is_never_vacuous(
            (rows, pass, orig) in (1usize..30).prop_flat_map(|n| (
                Just(n),
                prop::collection::btree_set(0..n, 0..=n),
                prop::collection::btree_set(0..n, 1..=n.min(3)),
            ))
        ) {
            let pass: Vec<usize> = pass.into_iter().collect();
            let c = classify("p", &outcomes(rows, &pass), &orig).unwrap();
            if c.category == Category::FalsifiablyCoupled {
                prop_assert!(c.pass_rows.len() < rows);
                prop_assert!(c.pass_rows.iter().any(|r| !orig.contains(r)));
            }
        }
    }
}
