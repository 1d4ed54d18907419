//! Machine-readable certification reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Thresholds used by the checkers. Defaults are the documented contract values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Structural identities (traces, exact algebraic relations).
    pub identity: f64,
    /// Generic residual threshold for derivation and axiom checks.
    pub check: f64,
    /// Modular commutation threshold for `[A, log Δ]`.
    pub modular: f64,
    /// Dirichlet margin threshold.
    pub margin: f64,
    /// Choi eigenvalue threshold (normalized Choi matrix).
    pub choi: f64,
    /// Unitality and symmetry residuals of the semigroup.
    pub semigroup: f64,
    /// Stopping tolerance of the cone projection solver.
    pub projection: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            check: 1e-9,
            modular: 1e-9,
            margin: 1e-8,
            choi: 1e-10,
            semigroup: 1e-10,
            projection: 1e-9,
            max_iterations: 50_000,
        }
    }
}

impl Tolerances {
    /// Every threshold scaled by `factor` (used for tightened re-verification).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            identity: self.identity * factor,
            check: self.check * factor,
            modular: self.modular * factor,
            margin: self.margin * factor,
            choi: self.choi * factor,
            semigroup: self.semigroup * factor,
            projection: self.projection,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub instance: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
}

impl CertificationReport {
    pub fn new(instance: impl Into<String>, seed: u64, tolerances: &Tolerances) -> Self {
        Self {
            instance: instance.into(),
            seed,
            tolerances: tolerances.clone(),
            checks: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Records a check that passes when `residual <= threshold`.
    pub fn bound(&mut self, name: impl Into<String>, residual: f64, threshold: f64) {
        let pass = residual.is_finite() && residual <= threshold;
        self.checks.push(Check {
            name: name.into(),
            residual,
            margin: threshold - residual,
            pass,
        });
    }

    /// Records a check with an explicit margin and verdict.
    pub fn record(&mut self, name: impl Into<String>, residual: f64, margin: f64, pass: bool) {
        self.checks.push(Check {
            name: name.into(),
            residual,
            margin,
            pass,
        });
    }

    pub fn label(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.labels.insert(key.into(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends the checks of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: CertificationReport) {
        for mut c in other.checks {
            if !prefix.is_empty() {
                c.name = format!("{prefix}.{}", c.name);
            }
            self.checks.push(c);
        }
        for (k, v) in other.labels {
            let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
            self.labels.insert(key, v);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `label#<first 16 hex digits of sha256(payload)>`.
pub fn fingerprint(label: &str, payload: &[u8]) -> String {
    let digest = Sha256::digest(payload);
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{label}#{hex}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_roundtrips_through_json() {
        let mut r = CertificationReport::new("x#0", 3, &Tolerances::default());
        r.bound("a", 1e-12, 1e-9);
        r.bound("b", 1.0, 1e-9);
        let back: CertificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = CertificationReport::new("x", 0, &Tolerances::default());
        r.bound("nan", f64::NAN, 1.0);
        assert!(!r.passed());
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint("m2", b"abc"), "m2#ba7816bf8f01cfea");
    }
}
