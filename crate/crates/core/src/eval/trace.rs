use std::collections::HashMap;

/// Binding- and name-evaluation counters.
///
/// Counters are always maintained; formatted lines are only collected when
/// `enabled` is set.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub enabled: bool,
    counts: HashMap<(String, String), u64>,
    lines: Vec<String>,
}

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Trace {
            enabled,
            ..Trace::default()
        }
    }

    pub fn record(&mut self, scope: &str, name: &str) -> u64 {
        let n = self
            .counts
            .entry((scope.to_string(), name.to_string()))
            .or_insert(0);
        *n += 1;
        let n = *n;
        if self.enabled {
            self.lines.push(format!("EVAL {scope}:{name} #{n}"));
        }
        n
    }

    /// Number of evaluations recorded for `name` in `scope`. Names compare
    /// case-insensitively.
    pub fn count(&self, scope: &str, name: &str) -> u64 {
        self.counts
            .iter()
            .filter(|((s, n), _)| s == scope && n.to_uppercase() == name.to_uppercase())
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn take_lines(&mut self) -> Vec<String> {
        std::mem::take(&mut self.lines)
    }

    pub fn clear(&mut self) {
        self.counts.clear();
        self.lines.clear();
    }
}
