use crate::lattice::Analysis;
use crate::mips::{fmt_mips_set, MipsSet};
use std::collections::BTreeMap;

/// Sparse element of the lifted lattice; absent keys are ⊤.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lifted<V> {
    pairs: BTreeMap<MipsSet, V>,
}

impl<V> Default for Lifted<V> {
    fn default() -> Self {
        Lifted { pairs: BTreeMap::new() }
    }
}

impl<V: Clone> Lifted<V> {
    pub fn new() -> Self {
        Lifted::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (MipsSet, V)>) -> Self {
        Lifted { pairs: pairs.into_iter().collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MipsSet, &V)> {
        self.pairs.iter()
    }

    pub fn values(&self) -> impl Iterator<Item = &V> {
        self.pairs.values()
    }

    pub fn keys(&self) -> impl Iterator<Item = &MipsSet> {
        self.pairs.keys()
    }

    pub fn get(&self, m: &[u32]) -> Option<&V> {
        self.pairs.get(m)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stores `d` under `m` without meeting.
    pub fn insert_raw(&mut self, m: MipsSet, d: V) {
        self.pairs.insert(m, d);
    }

    pub fn remove(&mut self, m: &[u32]) -> Option<V> {
        self.pairs.remove(m)
    }

    /// Meets `d` into the entry for `m`.
    pub fn meet_at<A: Analysis<Value = V>>(&mut self, a: &A, m: MipsSet, d: &V) {
        match self.pairs.get_mut(&m) {
            Some(cur) => *cur = a.meet(cur, d),
            None => {
                self.pairs.insert(m, d.clone());
            }
        }
    }

    pub fn drop_top<A: Analysis<Value = V>>(&mut self, a: &A) {
        self.pairs.retain(|_, d| !a.is_top(d));
    }

    /// Number of non-⊤ entries.
    pub fn live<A: Analysis<Value = V>>(&self, a: &A) -> usize {
        self.pairs.values().filter(|d| !a.is_top(d)).count()
    }

    /// `[{"mips": [1-based ids], "value": ...}]`.
    pub fn show(&self, f: impl Fn(&V) -> serde_json::Value) -> serde_json::Value {
        serde_json::Value::Array(
            self.pairs
                .iter()
                .map(|(m, d)| {
                    let ids: Vec<u32> = m.iter().map(|x| x + 1).collect();
                    serde_json::json!({ "mips": ids, "value": f(d) })
                })
                .collect(),
        )
    }

    pub fn describe(&self, f: impl Fn(&V) -> String) -> String {
        let parts: Vec<String> = self.pairs.iter().map(|(m, d)| format!("⟨{}, {}⟩", fmt_mips_set(m), f(d))).collect();
        format!("{{{}}}", parts.join(", "))
    }
}
