//! Pass/fail reports produced by the numerical condition checkers.
//!
//! A passing check means "no violation found in N samples": sampling cannot
//! prove a condition that quantifies over all of V, only falsify it.

use std::fmt::Write as _;

/// Outcome of one checked condition.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    /// Short identifier, e.g. "H3" or "growth".
    pub condition: String,
    pub pass: bool,
    /// Worst-case margin over all samples; negative margins fail.
    pub margin: f64,
    /// H-norm of the witness vector for a failed check.
    pub witness_norm: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn push(&mut self, condition: &str, pass: bool, margin: f64, witness_norm: Option<f64>) {
        self.checks.push(ConditionCheck {
            condition: condition.to_string(),
            pass,
            margin,
            witness_norm,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    /// Flat CSV: condition, pass, margin, witness-norm.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,pass,margin,witness_norm\n");
        for c in &self.checks {
            let w = c
                .witness_norm
                .map(|x| x.to_string())
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", c.condition, c.pass, c.margin, w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let mut r = ConditionReport::default();
        r.push("H1", true, 0.5, None);
        r.push("H3", false, -1.25, Some(2.0));
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "condition,pass,margin,witness_norm");
        assert_eq!(lines[2], "H3,false,-1.25,2");
        assert!(!r.all_pass());
        assert!(r.get("H1").unwrap().pass);
    }
}
