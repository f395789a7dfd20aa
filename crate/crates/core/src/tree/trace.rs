use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::netio::ActivationPattern;

/// Multiset of activation patterns observed while running a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TraceDoc", into = "TraceDoc")]
pub struct ActivationTrace {
    network_hash: String,
    counts: BTreeMap<ActivationPattern, u64>,
}

#[derive(Serialize, Deserialize)]
struct TraceDoc {
    network_hash: String,
    total_visits: u64,
    patterns: Vec<PatternCount>,
}

#[derive(Serialize, Deserialize)]
struct PatternCount {
    bits: ActivationPattern,
    count: u64,
}

impl TryFrom<TraceDoc> for ActivationTrace {
    type Error = Error;

    fn try_from(doc: TraceDoc) -> Result<Self> {
        let mut trace = ActivationTrace::new(doc.network_hash);
        for pc in doc.patterns {
            if pc.count == 0 {
                return Err(Error::Parse(format!("pattern {} has zero count", pc.bits)));
            }
            if trace.counts.contains_key(&pc.bits) {
                return Err(Error::Parse(format!("pattern {} listed twice", pc.bits)));
            }
            trace.add(pc.bits, pc.count)?;
        }
        if trace.total_visits() != doc.total_visits {
            return Err(Error::Parse(format!(
                "total_visits is {} but pattern counts sum to {}",
                doc.total_visits,
                trace.total_visits()
            )));
        }
        Ok(trace)
    }
}

impl From<ActivationTrace> for TraceDoc {
    fn from(t: ActivationTrace) -> Self {
        TraceDoc {
            total_visits: t.total_visits(),
            network_hash: t.network_hash,
            patterns: t.counts.into_iter().map(|(bits, count)| PatternCount { bits, count }).collect(),
        }
    }
}

impl ActivationTrace {
    pub fn new(network_hash: impl Into<String>) -> Self {
        ActivationTrace {
            network_hash: network_hash.into(),
            counts: BTreeMap::new(),
        }
    }

    pub fn network_hash(&self) -> &str {
        &self.network_hash
    }

    /// Pattern length, `None` for an empty trace.
    pub fn pattern_len(&self) -> Option<usize> {
        self.counts.keys().next().map(ActivationPattern::len)
    }

    pub fn record(&mut self, pattern: ActivationPattern) -> Result<()> {
        self.add(pattern, 1)
    }

    pub fn add(&mut self, pattern: ActivationPattern, count: u64) -> Result<()> {
        if let Some(len) = self.pattern_len() {
            if pattern.len() != len {
                return Err(Error::TraceMismatch(format!(
                    "pattern of length {} in a trace of {}-bit patterns",
                    pattern.len(),
                    len
                )));
            }
        }
        if count > 0 {
            *self.counts.entry(pattern).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ActivationTrace) -> Result<()> {
        if other.network_hash != self.network_hash {
            return Err(Error::TraceMismatch("merging traces of different networks".into()));
        }
        for (p, c) in &other.counts {
            self.add(p.clone(), *c)?;
        }
        Ok(())
    }

    pub fn count(&self, pattern: &ActivationPattern) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn total_visits(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Patterns in lexicographic order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = (&ActivationPattern, u64)> {
        self.counts.iter().map(|(p, c)| (p, *c))
    }

    /// The `k` most visited patterns; equal counts are ordered
    /// lexicographically by pattern (`0` before `1`).
    pub fn top_k(&self, k: usize) -> Vec<(&ActivationPattern, u64)> {
        let mut all: Vec<_> = self.iter().collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        all.truncate(k);
        all
    }

    /// log2 of the number of distinct patterns.
    pub fn effective_depth(&self) -> f64 {
        (self.distinct().max(1) as f64).log2()
    }

    /// SHA-256 of the serialized trace.
    pub fn id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("trace serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: TraceDoc = serde_json::from_str(s)?;
        ActivationTrace::try_from(doc)
    }
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<ActivationTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ActivationTrace::from_json_str(&text)
}

pub fn save_trace(trace: &ActivationTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, trace.to_json_string() + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> ActivationPattern {
        s.parse().unwrap()
    }

    #[test]
    fn counts_and_totals() {
        let mut t = ActivationTrace::new("h");
        for s in ["001", "011", "001", "001"] {
            t.record(pat(s)).unwrap();
        }
        assert_eq!(t.count(&pat("001")), 3);
        assert_eq!(t.distinct(), 2);
        assert_eq!(t.total_visits(), 4);
        assert!(t.record(pat("0011")).is_err());
    }

    #[test]
    fn top_k_breaks_ties_lexicographically() {
        let mut t = ActivationTrace::new("h");
        t.add(pat("11"), 5).unwrap();
        t.add(pat("01"), 5).unwrap();
        t.add(pat("00"), 9).unwrap();
        let top: Vec<String> = t.top_k(2).into_iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(top, vec!["00", "01"]);
    }

    #[test]
    fn file_format_round_trip() {
        let mut t = ActivationTrace::new("abc");
        t.add(pat("0101"), 7).unwrap();
        t.add(pat("1100"), 2).unwrap();
        let text = t.to_json_string();
        assert!(text.contains("\"total_visits\": 9"));
        assert!(text.contains("\"bits\": \"0101\""));
        assert_eq!(ActivationTrace::from_json_str(&text).unwrap(), t);
    }

    #[test]
    fn inconsistent_files_are_rejected() {
        let bad_total = r#"{"network_hash":"h","total_visits":3,"patterns":[{"bits":"01","count":2}]}"#;
        assert!(ActivationTrace::from_json_str(bad_total).is_err());
        let zero = r#"{"network_hash":"h","total_visits":0,"patterns":[{"bits":"01","count":0}]}"#;
        assert!(ActivationTrace::from_json_str(zero).is_err());
        let ragged = r#"{"network_hash":"h","total_visits":2,"patterns":[{"bits":"01","count":1},{"bits":"011","count":1}]}"#;
        assert!(ActivationTrace::from_json_str(ragged).is_err());
    }

    #[test]
    fn merge_requires_same_network() {
        let mut a = ActivationTrace::new("a");
        let b = ActivationTrace::new("b");
        assert!(a.merge(&b).is_err());
    }
}
