//! Flat `key=value` run configuration with dotted sections.
//!
//! Every key has a default in [`KEYS`]; unknown keys are rejected. An empty
//! value means "derive" for the keys documented that way.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// (key, default, meaning)
pub const KEYS: &[(&str, &str, &str)] = &[
    ("problem.kind", "robust_regression", "robust_regression | piecewise_linear | gflasso_svm | lovasz_cut"),
    ("problem.data", "synthetic", "libsvm file path, or 'synthetic'"),
    ("problem.d", "", "dimension override for libsvm files"),
    ("problem.positive_class", "", "binarize labels: this class is +1, the rest -1"),
    ("problem.scale", "none", "none | max_abs (per-column scaling)"),
    ("problem.synth.n", "506", "synthetic examples"),
    ("problem.synth.d", "13", "synthetic features"),
    ("problem.synth.noise", "0.5", "synthetic regression noise level"),
    ("problem.synth.margin", "1", "synthetic classification margin"),
    ("problem.synth.seed", "1", "synthetic data seed"),
    ("problem.loss", "absolute", "hinge | absolute | eps_insensitive (piecewise_linear)"),
    ("problem.eps_ins", "0.1", "width of the eps-insensitive band"),
    ("problem.reg", "none", "none | l1 | linf | l1_ball | linf_ball (piecewise_linear)"),
    ("problem.lambda", "0.1", "regularization weight (l1, linf, gflasso)"),
    ("problem.radius", "1", "ball radius (l1_ball, linf_ball)"),
    ("problem.p_loss", "1.5", "loss exponent in (1, 2) (robust_regression)"),
    ("problem.region_radius", "", "radius of the ball the Lipschitz bound holds on; empty = 10 max(1, |w0|)"),
    ("problem.constrain_region", "false", "install the region ball as the feasible set"),
    ("problem.graph", "chain", "chain | correlation | edge-list file path (gflasso_svm)"),
    ("problem.graph_cutoff", "0.3", "|correlation| cutoff for problem.graph=correlation"),
    ("problem.lovasz.d", "10", "ground set size (lovasz_cut)"),
    ("problem.lovasz.density", "0.4", "edge probability (lovasz_cut)"),
    ("problem.lovasz.modular_scale", "1", "scale of the modular term (lovasz_cut)"),
    ("problem.lovasz.seed", "1", "graph seed (lovasz_cut)"),
    ("problem.fstar_lower_bound", "", "lower bound on f*; empty = the problem's own bound"),
    ("solver.algo", "rsg", "sg | rsg | rsg_dap | r2sg | baseline_sg"),
    ("solver.alpha", "2", "step reduction factor between stages"),
    ("solver.t", "1000", "inner iterations per stage (t1 for r2sg)"),
    ("solver.stages", "", "stages K; empty = from target_eps, else 10"),
    ("solver.target_eps", "", "target accuracy; empty = eps0 / alpha^K"),
    ("solver.eps0", "", "initial gap bound; empty = f(w0) - lower bound"),
    ("solver.eta", "0.01", "fixed step (sg)"),
    ("solver.eta0", "0.1", "initial step of eta0/sqrt(tau) (baseline_sg)"),
    ("solver.iters", "10000", "iterations (sg, baseline_sg)"),
    ("solver.eta_scale", "1", "multiplier on the initial step of rsg, rsg_dap, r2sg"),
    ("solver.norm_p", "2", "prox exponent in (1, 2] or 'auto' = 2 ln d/(2 ln d - 1) (rsg_dap)"),
    ("solver.lambda_mode", "unit", "unit | inv_grad_norm (rsg_dap)"),
    ("solver.theta", "", "error-bound exponent for r2sg growth 2^(2(1-theta))"),
    ("solver.growth", "", "r2sg growth factor; empty = 1.5 for robust_regression, else 1.15"),
    ("solver.restart_every", "5", "stages per rsg call (r2sg)"),
    ("solver.max_calls", "20", "maximum rsg calls (r2sg)"),
    ("solver.rel_tol", "1e-10", "r2sg stops when a call improves by less than this"),
    ("solver.recalibrate", "false", "r2sg: eps0 <- eps0/alpha^K + eps between calls"),
    ("solver.w0", "zeros", "zeros | gaussian"),
    ("solver.seed", "0", "seed of the gaussian w0 (ChaCha8)"),
    ("output.dir", "out", "artifact directory"),
    ("output.run_id", "", "run name; empty = solver.algo"),
    ("output.stride", "auto", "auto = max(1, t/1000) per stage, or N"),
    ("output.wallclock", "false", "record monotone-clock nanoseconds (breaks bitwise reproducibility)"),
    ("output.oracle", "none", "none | long_run (adds an f* upper bound to the summary)"),
    ("output.oracle_budget", "200000", "subgradient calls of the long-run oracle"),
];

/// A fully resolved configuration: every key of [`KEYS`] present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSpec {
    entries: BTreeMap<String, String>,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            entries: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RunSpec {
    /// Defaults overlaid with the `key=value` lines of `text`. Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut spec = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected key=value, got '{line}'", i + 1)));
            };
            if let Err(CliError::Config(m)) = spec.set(k.trim(), v.trim()) {
                return Err(CliError::Config(format!("line {}: {m}", i + 1)));
            }
        }
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> CliResult<Self> {
        let mut spec = Self::default();
        for (k, v) in pairs {
            spec.set(k, v)?;
        }
        Ok(spec)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match self.entries.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key '{key}'"))),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.entries.get(key).map(String::as_str).unwrap_or_else(|| panic!("undeclared key {key}"))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| CliError::Config(format!("{key} = '{v}' is not a valid {}", std::any::type_name::<T>())))
    }

    /// None when the value is empty.
    pub fn optional<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        if self.get(key).is_empty() {
            Ok(None)
        } else {
            self.parsed(key).map(Some)
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// The `problem.*` entries.
    pub fn problem_block(&self) -> BTreeMap<&str, &str> {
        self.entries
            .iter()
            .filter(|(k, _)| k.starts_with("problem."))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    pub fn run_id(&self) -> String {
        match self.get("output.run_id") {
            "" => self.get("solver.algo").to_string(),
            id => id.to_string(),
        }
    }

    /// Config text that parses back to this spec.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overlays_defaults() {
        let s = RunSpec::parse("# comment\nsolver.algo = r2sg\n\nsolver.t=100 # trailing\n").unwrap();
        assert_eq!(s.get("solver.algo"), "r2sg");
        assert_eq!(s.parsed::<u64>("solver.t").unwrap(), 100);
        assert_eq!(s.get("solver.alpha"), "2");
        assert_eq!(s.optional::<f64>("solver.eps0").unwrap(), None);
    }

    #[test]
    fn unknown_and_malformed_rejected() {
        assert!(matches!(RunSpec::parse("solver.nope=1"), Err(CliError::Config(_))));
        assert!(matches!(RunSpec::parse("solver.t"), Err(CliError::Config(_))));
        let s = RunSpec::parse("solver.t=abc").unwrap();
        assert!(s.parsed::<u64>("solver.t").is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = RunSpec::parse("problem.kind=lovasz_cut\noutput.run_id=x\n").unwrap();
        assert_eq!(RunSpec::parse(&s.to_text()).unwrap(), s);
        assert_eq!(s.run_id(), "x");
    }
}
