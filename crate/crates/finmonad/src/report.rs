//! Check reports: plain data, renderable as text or JSON with identical
//! payloads.

use serde::Serialize;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Pass {
        cases: usize,
    },
    /// The check domain was too large to enumerate; a seeded uniform sample
    /// was verified instead.
    Sampled {
        cases: usize,
        domain: String,
    },
    Fail {
        counterexample: String,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub law: String,
    pub site: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub subject: String,
    pub records: Vec<CheckRecord>,
}

impl LawReport {
    pub fn new(subject: impl Into<String>) -> Self {
        LawReport {
            subject: subject.into(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, law: impl Into<String>, site: impl Into<String>, outcome: Outcome) {
        self.records.push(CheckRecord {
            law: law.into(),
            site: site.into(),
            outcome,
        });
    }

    /// No failures; sampled and skipped records do not count as failures.
    pub fn is_clean(&self) -> bool {
        !self
            .records
            .iter()
            .any(|r| matches!(r.outcome, Outcome::Fail { .. }))
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Fail { .. }))
            .collect()
    }

    pub fn merge(&mut self, other: LawReport) {
        self.records.extend(other.records);
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("law report for {}\n", self.subject);
        for r in &self.records {
            let line = match &r.outcome {
                Outcome::Pass { cases } => format!("PASS {} @ {} ({cases} cases)", r.law, r.site),
                Outcome::Sampled { cases, domain } => format!(
                    "PASS {} @ {} (sampled {cases} of {domain})",
                    r.law, r.site
                ),
                Outcome::Fail { counterexample } => {
                    format!("FAIL {} @ {}: {counterexample}", r.law, r.site)
                }
                Outcome::Skipped { reason } => {
                    format!("SKIP {} @ {}: {reason}", r.law, r.site)
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
