use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CaptureRecord, Context};
use crate::error::{Error, Result};
use crate::scalar::Tuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Test,
    Field,
    Original,
}

impl From<Context> for Provenance {
    fn from(c: Context) -> Self {
        match c {
            Context::Test => Provenance::Test,
            Context::Field => Provenance::Field,
        }
    }
}

/// The deduplicated argument tuples of one target, originals first, then
/// the rest in lexicographic order of their dedup key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureUnion {
    pub target: String,
    pub tuples: Vec<Tuple>,
    /// Parallel to `tuples`.
    pub provenance: Vec<BTreeSet<Provenance>>,
}

impl CaptureUnion {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn originals(&self) -> Vec<&Tuple> {
        self.tuples
            .iter()
            .zip(&self.provenance)
            .filter(|(_, p)| p.contains(&Provenance::Original))
            .map(|(t, _)| t)
            .collect()
    }

    /// Tuples seen in the given session.
    pub fn count_from(&self, source: Provenance) -> usize {
        self.provenance.iter().filter(|p| p.contains(&source)).count()
    }

    pub fn position(&self, tuple: &Tuple) -> Option<usize> {
        self.tuples.iter().position(|t| t == tuple)
    }

    /// One synthetic record per (tuple, session) pair. Feeding these and
    /// [`Self::originals`] back into [`build_union`] reproduces the union.
    pub fn to_records(&self) -> Vec<CaptureRecord> {
        let mut out = Vec::new();
        for (tuple, flags) in self.tuples.iter().zip(&self.provenance) {
            for (flag, context) in [(Provenance::Test, Context::Test), (Provenance::Field, Context::Field)] {
                if flags.contains(&flag) {
                    out.push(CaptureRecord {
                        target: self.target.clone(),
                        tuple: tuple.clone(),
                        context,
                        test_id: None,
                        seq: out.len() as u64,
                    });
                }
            }
        }
        out
    }
}

/// Merges capture records with the original tuples of every target.
///
/// `originals` lists each target's original tuples in source order.
/// Tuples containing an unserializable marker cannot be replayed and are
/// left out.
pub fn build_union(
    records: &[CaptureRecord],
    originals: &BTreeMap<String, Vec<Tuple>>,
) -> BTreeMap<String, CaptureUnion> {
    let mut seen: BTreeMap<&str, HashMap<&Tuple, BTreeSet<Provenance>>> = BTreeMap::new();
    for record in records {
        if record.tuple.has_unserializable() {
            continue;
        }
        seen.entry(record.target.as_str())
            .or_default()
            .entry(&record.tuple)
            .or_default()
            .insert(record.context.into());
    }
    for target in originals.keys() {
        seen.entry(target.as_str()).or_default();
    }

    let mut unions = BTreeMap::new();
    for (target, mut flags) in seen {
        let mut tuples = Vec::new();
        let mut provenance = Vec::new();
        for original in originals.get(target).into_iter().flatten() {
            if original.has_unserializable() || tuples.contains(original) {
                continue;
            }
            let mut p = flags.remove(original).unwrap_or_default();
            p.insert(Provenance::Original);
            tuples.push(original.clone());
            provenance.push(p);
        }
        let mut rest: Vec<(String, &Tuple, BTreeSet<Provenance>)> =
            flags.into_iter().map(|(t, p)| (t.key(), t, p)).collect();
        rest.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, tuple, p) in rest {
            tuples.push(tuple.clone());
            provenance.push(p);
        }
        unions.insert(
            target.to_owned(),
            CaptureUnion {
                target: target.to_owned(),
                tuples,
                provenance,
            },
        );
    }
    unions
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGain {
    pub original_count: usize,
    pub union_count: usize,
    pub factor: f64,
    pub orders_of_magnitude: u32,
}

/// How much larger the union is than the original inputs.
pub fn coverage_gain(union_count: usize, original_count: usize) -> CoverageGain {
    let base = original_count.max(1) as u128;
    let union = union_count as u128;
    // floor(log10(union / base)), computed without floating point.
    let mut orders = 0;
    let mut scaled = base * 10;
    while union > 0 && scaled <= union {
        orders += 1;
        scaled *= 10;
    }
    CoverageGain {
        original_count,
        union_count,
        factor: union_count as f64 / base as f64,
        orders_of_magnitude: orders,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct UnionEntry {
    tuples: Vec<Tuple>,
    provenance: Vec<Vec<Provenance>>,
}

/// The `union.json` document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnionFile(pub BTreeMap<String, CaptureUnion>);

impl UnionFile {
    pub fn to_json(&self) -> String {
        let doc: BTreeMap<&str, UnionEntry> = self
            .0
            .iter()
            .map(|(id, u)| {
                (
                    id.as_str(),
                    UnionEntry {
                        tuples: u.tuples.clone(),
                        provenance: u.provenance.iter().map(|p| p.iter().copied().collect()).collect(),
                    },
                )
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&doc).expect("union serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BTreeMap<String, UnionEntry> =
            serde_json::from_str(text).map_err(|e| Error::json("union.json", e))?;
        let mut unions = BTreeMap::new();
        for (id, entry) in doc {
            if entry.tuples.len() != entry.provenance.len() {
                return Err(Error::Encoding(format!(
                    "union.json: `{id}` has {} tuples but {} provenance entries",
                    entry.tuples.len(),
                    entry.provenance.len()
                )));
            }
            unions.insert(
                id.clone(),
                CaptureUnion {
                    target: id,
                    tuples: entry.tuples,
                    provenance: entry.provenance.into_iter().map(|p| p.into_iter().collect()).collect(),
                },
            );
        }
        Ok(UnionFile(unions))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{canonicalize, Canonical, Scalar, ScalarKind};
    use proptest::prelude::*;

    const T: &str = "radio_form::RadioButton::select_option(text)";

    fn text(s: &str) -> Tuple {
        Tuple::new(vec![canonicalize(ScalarKind::Text, &Scalar::Text(s.into())).unwrap()])
    }

    fn rec(s: &str, context: Context) -> CaptureRecord {
        CaptureRecord {
            target: T.into(),
            tuple: text(s),
            context,
            test_id: None,
            seq: 0,
        }
    }

    fn originals(list: &[&str]) -> BTreeMap<String, Vec<Tuple>> {
        BTreeMap::from([(T.to_owned(), list.iter().map(|s| text(s)).collect())])
    }

    #[test]
    fn twelve_unique_options_with_original_first() {
        let field = ["Yes", "Off", "a", "b", "c", "d", "e", "B", "on", "", "1", " b", "c"];
        let mut records = vec![rec("b", Context::Test)];
        records.extend(field.iter().map(|s| rec(s, Context::Field)));
        let unions = build_union(&records, &originals(&["b"]));
        let u = &unions[T];
        assert_eq!(u.len(), 12);
        assert_eq!(u.tuples[0], text("b"));
        assert_eq!(
            u.provenance[0],
            BTreeSet::from([Provenance::Test, Provenance::Field, Provenance::Original])
        );
        let rest: Vec<String> = u.tuples[1..].iter().map(|t| t.key()).collect();
        let mut sorted = rest.clone();
        sorted.sort();
        assert_eq!(rest, sorted);
    }

    #[test]
    fn original_without_records_is_injected() {
        let unions = build_union(&[], &originals(&["b"]));
        let u = &unions[T];
        assert_eq!(u.tuples, vec![text("b")]);
        assert_eq!(u.provenance[0], BTreeSet::from([Provenance::Original]));
    }

    #[test]
    fn unserializable_tuples_are_left_out() {
        let mut r = rec("x", Context::Field);
        r.tuple = Tuple::new(vec![Canonical::unserializable()]);
        let unions = build_union(&[r, rec("y", Context::Field)], &BTreeMap::new());
        assert_eq!(unions[T].tuples, vec![text("y")]);
    }

    #[test]
    fn coverage_gain_examples() {
        let g = coverage_gain(2694, 2);
        assert_eq!((g.factor, g.orders_of_magnitude), (1347.0, 3));
        let g = coverage_gain(1, 1);
        assert_eq!((g.factor, g.orders_of_magnitude), (1.0, 0));
        let g = coverage_gain(101, 1);
        assert_eq!((g.factor, g.orders_of_magnitude), (101.0, 2));
        let g = coverage_gain(0, 0);
        assert_eq!((g.factor, g.orders_of_magnitude), (0.0, 0));
        assert_eq!(coverage_gain(99, 1).orders_of_magnitude, 1);
        assert_eq!(coverage_gain(100, 1).orders_of_magnitude, 2);
        assert_eq!(coverage_gain(5, 0).factor, 5.0);
    }

    #[test]
    fn union_json_round_trips_bytes() {
        let records = vec![rec("c", Context::Test), rec("Yes", Context::Field), rec("q\"\n", Context::Field)];
        let file = UnionFile(build_union(&records, &originals(&["b"])));
        let json = file.to_json();
        let again = UnionFile::from_json(&json).unwrap();
        assert_eq!(again, file);
        assert_eq!(again.to_json(), json);
        assert!(json.contains("\"original\""));
    }

    fn arb_records() -> impl Strategy<Value = Vec<CaptureRecord>> {
        prop::collection::vec(
            ("[a-d]{0,2}", prop::bool::ANY).prop_map(|(s, test)| {
                rec(&s, if test { Context::Test } else { Context::Field })
            }),
            0..40,
        )
    }

    proptest! {
        #[test]
        fn rebuilding_a_union_changes_nothing(records in arb_records(), orig in prop::collection::vec("[a-e]{0,2}", 0..3)) {
            let orig: Vec<&str> = orig.iter().map(String::as_str).collect();
            let first = build_union(&records, &originals(&orig));
            let u = &first[T];
            let again_originals = BTreeMap::from([(T.to_owned(), u.originals().into_iter().cloned().collect())]);
            let second = build_union(&u.to_records(), &again_originals);
            prop_assert_eq!(&second, &first);
        }

        #[test]
        fn ingestion_order_does_not_matter(records in arb_records(), seed in any::<u64>()) {
            let mut shuffled = records.clone();
            let len = shuffled.len();
            if len > 1 {
                let mut state = seed;
                for i in (1..len).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (state >> 33) as usize % (i + 1));
                }
            }
            let o = originals(&["b"]);
            prop_assert_eq!(build_union(&records, &o), build_union(&shuffled, &o));
        }

        #[test]
        fn adding_records_never_shrinks(records in arb_records(), extra in arb_records()) {
            let o = originals(&["b"]);
            let before = build_union(&records, &o);
            let mut all = records.clone();
            all.extend(extra);
            let after = build_union(&all, &o);
            for (target, u) in &before {
                let grown = &after[target];
                for (tuple, flags) in u.tuples.iter().zip(&u.provenance) {
                    let i = grown.position(tuple).expect("tuple kept");
                    prop_assert!(grown.provenance[i].is_superset(flags));
                }
            }
        }

        #[test]
        fn originals_are_contained_and_flagged(records in arb_records(), orig in prop::collection::vec("[a-e]{0,2}", 1..4)) {
            let orig: Vec<&str> = orig.iter().map(String::as_str).collect();
            let unions = build_union(&records, &originals(&orig));
            let u = &unions[T];
            for o in &orig {
                let i = u.position(&text(o)).expect("original present");
                prop_assert!(u.provenance[i].contains(&Provenance::Original));
            }
            let keys: BTreeSet<String> = u.tuples.iter().map(Tuple::key).collect();
            prop_assert_eq!(keys.len(), u.len());
        }
    }
}
