//! Parameter sweeps: a configuration expands into a deduplicated, ordered
//! case list whose members are evaluated in parallel and reassembled in
//! list order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::families::{random_bumps, TestFunction};
use crate::hyperbolic::{self, check_hyp_equality, check_identity_hr2hyper, check_newhyp1, mode_defect};
use crate::identities::inequalities::{probe_inequality, InequalityId};
use crate::identities::log::{check_hr32, check_hr34, check_hrln2a};
use crate::identities::{self as ids, IdentityError, IDENTITY_TOL};
use crate::manifold::{check_hrv, check_hy_equa1, probe_corollary15, standard_cases, ModelSpace, MANIFOLD_TOL};
use crate::profile::{CompactProfile, ProfileExpr};
use crate::radial::PiecewiseRadial;
use crate::report::{CheckKind, Params, ReportDocument, ResidualReport, Terms, Tolerances};

/// Default seed of every randomized input.
pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Euclid,
    Log,
    Manifold,
    Hyperbolic,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Euclid, Suite::Log, Suite::Manifold, Suite::Hyperbolic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Euclid => "euclid",
            Self::Log => "log",
            Self::Manifold => "manifold",
            Self::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite `{0}` (expected euclid, log, manifold or hyperbolic)")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| UnknownSuite(s.to_owned()))
    }
}

/// Everything a sweep needs. Unset parameter lists fall back to the
/// per-suite defaults of [`SweepConfig::defaults_for`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub suites: Vec<Suite>,
    pub n: Option<Vec<u32>>,
    pub alpha: Option<Vec<f64>>,
    pub m: Option<Vec<u32>>,
    pub k: Option<Vec<u32>>,
    pub ell: Option<Vec<u32>>,
    /// `b` values of the log suite.
    pub b: Option<Vec<f64>>,
    pub families: Option<Vec<TestFunction>>,
    /// Random bumps per inequality probe.
    pub samples: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Weight and Bessel profile of a custom manifold run.
    pub weight: Option<ProfileExpr>,
    pub profile: Option<ProfileExpr>,
    /// Model space of a custom manifold run.
    pub hyperbolic_space: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            suites: vec![Suite::Euclid],
            n: None,
            alpha: None,
            m: None,
            k: None,
            ell: None,
            b: None,
            families: None,
            samples: 5,
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            weight: None,
            profile: None,
            hyperbolic_space: false,
        }
    }
}

/// Resolved parameter lists for one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: Vec<u32>,
    pub alpha: Vec<f64>,
    pub m: Vec<u32>,
    pub k: Vec<u32>,
    pub ell: Vec<u32>,
    pub b: Vec<f64>,
    pub families: Vec<TestFunction>,
}

impl SweepConfig {
    pub fn new(suites: Vec<Suite>) -> Self {
        Self { suites, ..Self::default() }
    }

    pub fn defaults_for(suite: Suite) -> Grid {
        let log_support = crate::families::standard_supports()[2];
        match suite {
            Suite::Euclid => Grid {
                n: vec![2, 3, 5, 8],
                alpha: vec![-3.0, 0.0, 2.5],
                m: vec![1, 2, 3],
                k: vec![0, 1, 2, 3],
                ell: vec![0, 1, 2],
                b: vec![],
                families: vec![TestFunction::bump(1.0, 2.0, 14)],
            },
            Suite::Log => Grid {
                n: vec![2, 3, 5],
                alpha: vec![-1.0, 0.0, 1.0],
                m: vec![],
                k: vec![1, 2],
                ell: vec![0, 1, 2],
                b: vec![0.0, 0.5, 1.25],
                families: vec![TestFunction::bump(log_support.0, log_support.1, 10)],
            },
            Suite::Manifold => Grid {
                n: vec![],
                alpha: vec![],
                m: vec![],
                k: vec![],
                ell: vec![],
                b: vec![],
                families: vec![TestFunction::bump(1.0, 2.0, 8)],
            },
            Suite::Hyperbolic => Grid {
                n: vec![2, 3, 4, 5, 6],
                alpha: vec![],
                m: vec![],
                k: vec![],
                ell: vec![0, 1, 2],
                b: vec![],
                families: vec![TestFunction::bump(0.5, 2.0, 6)],
            },
        }
    }

    /// Parameter lists of `suite` with the configured overrides applied.
    pub fn grid(&self, suite: Suite) -> Grid {
        let d = Self::defaults_for(suite);
        Grid {
            n: self.n.clone().unwrap_or(d.n),
            alpha: self.alpha.clone().unwrap_or(d.alpha),
            m: self.m.clone().unwrap_or(d.m),
            k: self.k.clone().unwrap_or(d.k),
            ell: self.ell.clone().unwrap_or(d.ell),
            b: self.b.clone().unwrap_or(d.b),
            families: self.families.clone().unwrap_or(d.families),
        }
    }
}

type Job = Arc<dyn Fn() -> Vec<ResidualReport> + Send + Sync>;

/// One unit of work; `id` is unique within a case list.
#[derive(Clone)]
pub struct Case {
    pub id: String,
    job: Job,
}

impl fmt::Debug for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Case").field("id", &self.id).finish()
    }
}

impl Case {
    pub fn run(&self) -> Vec<ResidualReport> {
        (self.job)()
    }
}

#[derive(Default)]
struct CaseList {
    cases: Vec<Case>,
    seen: std::collections::HashSet<String>,
}

impl CaseList {
    fn push(&mut self, id: String, job: impl Fn() -> Vec<ResidualReport> + Send + Sync + 'static) {
        if self.seen.insert(id.clone()) {
            self.cases.push(Case { id, job: Arc::new(job) });
        }
    }

    /// A case evaluating one closed-form identity on a radial profile.
    fn radial(
        &mut self,
        id: String,
        family: &TestFunction,
        check: impl Fn(&PiecewiseRadial) -> Result<ResidualReport, IdentityError> + Send + Sync + 'static,
    ) {
        let family = family.clone();
        let label = family.label();
        self.push(id.clone(), move || {
            let report = match family.profile() {
                Ok(f) => check(&f).unwrap_or_else(|e| failed(&id, e.to_string())),
                Err(e) => failed(&id, e.to_string()),
            };
            vec![labelled(report, &label)]
        });
    }
}

fn failed(case: &str, why: String) -> ResidualReport {
    let name = case.split('/').nth(1).unwrap_or(case);
    ResidualReport::failed(name, CheckKind::Identity, Params::new(), why)
}

fn labelled(mut r: ResidualReport, label: &str) -> ResidualReport {
    r.params.f = Some(label.to_owned());
    r
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

/// Expands the configuration into its case list, in report order.
pub fn expand(cfg: &SweepConfig) -> Vec<Case> {
    let mut list = CaseList::default();
    let mut suites = cfg.suites.clone();
    suites.dedup();
    for suite in suites {
        let g = cfg.grid(suite);
        match suite {
            Suite::Euclid => euclid(&mut list, &g, cfg),
            Suite::Log => log(&mut list, &g, cfg),
            Suite::Manifold => manifold(&mut list, &g, cfg),
            Suite::Hyperbolic => hyperbolic_cases(&mut list, &g, cfg),
        }
    }
    list.cases
}

fn euclid(list: &mut CaseList, g: &Grid, cfg: &SweepConfig) {
    for fam in &g.families {
        let fl = fam.label();
        for &n in &g.n {
            for &alpha in &g.alpha {
                let at = |name: &str| format!("euclid/{name}/n={n}/alpha={}/f={fl}", fmt_f(alpha));
                list.radial(at("rHR1a"), fam, move |f| Ok(ids::check_hardy_radial(n, alpha, f)));
                list.radial(at("T0"), fam, move |f| Ok(ids::check_t0(n, alpha, alpha + 1.7, f)));
                list.radial(at("newT1"), fam, move |f| Ok(ids::check_new_t1(n, alpha, alpha - 0.4, 0.65, f)));
                list.radial(at("newT2"), fam, move |f| Ok(ids::check_new_t2(n, alpha, f)));
                list.radial(at("HR13"), fam, move |f| Ok(ids::check_hr13(n, alpha, f)));
                list.radial(at("rHR2a"), fam, move |f| Ok(ids::check_rhr2a(n, alpha, f)));
                for &k in &g.k {
                    let atk = |name: &str| format!("{}/k={k}", at(name));
                    list.radial(atk("kA"), fam, move |f| Ok(ids::check_ka(n, alpha, k, f)));
                    list.radial(atk("kB"), fam, move |f| Ok(ids::check_kb(n, alpha, k, f)));
                    list.radial(atk("newR1"), fam, move |f| Ok(ids::check_new_r1(n, alpha, 0.75, k, f)));
                    list.radial(atk("iteRak"), fam, move |f| Ok(ids::check_ite_rak(n, alpha, k, f)));
                }
                for &m in &g.m {
                    let atm = |name: &str| format!("{}/m={m}", at(name));
                    list.radial(atm("rHRma"), fam, move |f| ids::check_thm_radial_poly(n, alpha, m, f));
                    list.radial(atm("rHRmad"), fam, move |f| ids::check_prop_radial_grad(n, alpha, m, f));
                }
                for &ell in &g.ell {
                    let atl = |name: &str| format!("{}/ell={ell}", at(name));
                    list.radial(atl("HR1a"), fam, move |f| ids::check_hardy_full(n, alpha, ell, f));
                    list.radial(atl("HR2a"), fam, move |f| ids::check_hr2a(n, alpha, ell, f));
                    for &m in &g.m {
                        let id = format!("{}/m={m}", atl("HRm"));
                        list.radial(id, fam, move |f| ids::check_thm_poly(n, alpha, m, ell, f));
                    }
                }
            }
        }
    }
    inequality_probes(list, g, cfg, "euclid", &InequalityId::ALL[..7]);
}

fn inequality_probes(list: &mut CaseList, g: &Grid, cfg: &SweepConfig, suite: &str, which: &[InequalityId]) {
    if cfg.samples == 0 {
        return;
    }
    for fam in &g.families {
        let samples = random_bumps(fam.a, fam.b, fam.k, cfg.samples, cfg.seed);
        for &n in &g.n {
            for &alpha in &g.alpha {
                for &id in which {
                    let samples = samples.clone();
                    let key = format!("{suite}/{id}/n={n}/alpha={}/f={}", fmt_f(alpha), fam.label());
                    list.push(key, move || probe_inequality(id, n, alpha, &samples));
                }
            }
        }
    }
}

fn log(list: &mut CaseList, g: &Grid, cfg: &SweepConfig) {
    for fam in &g.families {
        let fl = fam.label();
        for &n in &g.n {
            for &alpha in &g.alpha {
                let at = |name: &str| format!("log/{name}/n={n}/alpha={}/f={fl}", fmt_f(alpha));
                for &b in &g.b {
                    list.radial(format!("{}/b={}", at("HR32"), fmt_f(b)), fam, move |f| check_hr32(n, alpha, b, f));
                }
                for &k in &g.k {
                    list.radial(format!("{}/k={k}", at("HR34")), fam, move |f| check_hr34(n, alpha, k, f));
                }
                for &ell in &g.ell {
                    list.radial(format!("{}/ell={ell}", at("HRln2a")), fam, move |f| check_hrln2a(n, alpha, ell, f));
                }
            }
        }
    }
    inequality_probes(list, g, cfg, "log", &[InequalityId::Hr21ln]);
}

fn manifold(list: &mut CaseList, g: &Grid, cfg: &SweepConfig) {
    let cases: Vec<(u32, ModelSpace, ProfileExpr, ProfileExpr)> = match (&cfg.weight, &cfg.profile) {
        (None, None) => standard_cases().into_iter().map(|(k, s, f)| (k, s, ProfileExpr::constant(1.0), f)).collect(),
        (v, f) => {
            let v = v.clone().unwrap_or_else(|| ProfileExpr::constant(1.0));
            let f = f.clone().unwrap_or_else(|| ProfileExpr::constant(1.0));
            let ns = if g.n.is_empty() { vec![5] } else { g.n.clone() };
            let ks = if g.k.is_empty() { vec![1, 2] } else { g.k.clone() };
            let mut out = Vec::new();
            for &n in &ns {
                let space = if cfg.hyperbolic_space { ModelSpace::Hyperbolic(n) } else { ModelSpace::Euclidean(n) };
                for &k in &ks {
                    out.push((k, space, v.clone(), f.clone()));
                }
            }
            out
        }
    };
    for fam in &g.families {
        let fl = fam.label();
        for (k, space, v, f) in &cases {
            let (k, space) = (*k, *space);
            let key = format!("manifold/{space}/k={k}/V={v}/f={f}/u={fl}");
            let (v, f, fam) = (v.clone(), f.clone(), fam.clone());
            list.push(key, move || {
                let u = match CompactProfile::from_test_function(&fam) {
                    Ok(u) => u,
                    Err(e) => return vec![failed("manifold/HRV", e.to_string())],
                };
                let label = fam.label();
                [check_hy_equa1(&v, &f, &u, space), check_hrv(k, &v, &f, &u, space), probe_corollary15(k, &f, &u, space)]
                    .into_iter()
                    .map(|r| labelled(r, &label))
                    .collect()
            });
        }
    }
}

fn hyperbolic_cases(list: &mut CaseList, g: &Grid, cfg: &SweepConfig) {
    for fam in &g.families {
        let fl = fam.label();
        for &n in &g.n {
            let at = |name: &str| format!("hyperbolic/{name}/n={n}/f={fl}");
            for &ell in &g.ell {
                let fam2 = fam.clone();
                list.push(format!("{}/ell={ell}", at("HR2hyper")), move || {
                    with_compact(&fam2, "HR2hyper", |u| vec![check_identity_hr2hyper(n, ell, u)])
                });
                let key = format!("hyperbolic/mode_defect/n={n}/ell={ell}");
                list.push(key, move || vec![defect_case(n, ell)]);
            }
            if n >= 3 {
                let fam2 = fam.clone();
                list.push(at("hyp"), move || with_compact(&fam2, "hyp", |u| vec![check_hyp_equality(n, u)]));
                let fam2 = fam.clone();
                list.push(at("newhyp1"), move || with_compact(&fam2, "newhyp1", |u| vec![check_newhyp1(n, u)]));
            }
        }
    }
    if cfg.samples == 0 {
        return;
    }
    for fam in &g.families {
        let samples = random_bumps(fam.a, fam.b, fam.k, cfg.samples, cfg.seed);
        for &n in g.n.iter().filter(|&&n| n >= 3) {
            for &ell in &g.ell {
                let samples = samples.clone();
                let key = format!("hyperbolic/HRhyper/n={n}/ell={ell}/f={}", fam.label());
                list.push(key, move || hyperbolic::probe_hyper_inequalities(n, ell, &samples));
            }
        }
    }
}

fn with_compact(fam: &TestFunction, id: &str, check: impl Fn(&CompactProfile) -> Vec<ResidualReport>) -> Vec<ResidualReport> {
    match CompactProfile::from_test_function(fam) {
        Ok(u) => check(&u).into_iter().map(|r| labelled(r, &fam.label())).collect(),
        Err(e) => vec![ResidualReport::failed(id, CheckKind::Identity, Params::new(), e.to_string())],
    }
}

/// `μ² = (n-1)μ` holds exactly at `ℓ = 1` and fails for `ℓ ≥ 2`, so it is
/// an identity case at `ℓ ≤ 1` and a bound `μ² ≥ (n-1)μ` otherwise.
fn defect_case(n: u32, ell: u32) -> ResidualReport {
    let (mu2, lower) = mode_defect(n, ell);
    let params = Params::new().n(n).ell(ell);
    let terms = Terms::new().with("(n-1)mu", lower as f64);
    if ell <= 1 {
        ResidualReport::identity("mode_defect", params, mu2 as f64, terms, 0.0)
    } else {
        ResidualReport::inequality("mode_defect", params, mu2 as f64, terms, 0.0)
    }
}

/// Maps the built-in tolerance classes onto the configured ones.
fn apply_tolerances(r: ResidualReport, t: &Tolerances) -> ResidualReport {
    let tol = r.tolerance;
    if tol == IDENTITY_TOL && r.kind == CheckKind::Identity {
        r.retolerance(t.identity)
    } else if tol == MANIFOLD_TOL {
        r.retolerance(t.quadrature)
    } else if tol == ids::inequalities::INEQUALITY_TOL && r.kind == CheckKind::Inequality {
        r.retolerance(t.inequality)
    } else {
        r
    }
}

#[derive(Debug, thiserror::Error)]
#[error("could not start the worker pool: {0}")]
pub struct PoolError(#[from] rayon::ThreadPoolBuildError);

/// Runs every case on `jobs` workers (all available cores when `None`);
/// the result does not depend on the worker count.
pub fn run(cfg: &SweepConfig, jobs: Option<usize>) -> Result<ReportDocument, PoolError> {
    let cases = expand(cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let nested: Vec<Vec<ResidualReport>> = pool.install(|| cases.par_iter().map(Case::run).collect());
    let reports = nested.into_iter().flatten().map(|r| apply_tolerances(r, &cfg.tolerances)).collect();
    Ok(ReportDocument::new(cfg.seed, cfg.tolerances, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nosuch".parse::<Suite>().is_err());
    }

    #[test]
    fn expansion_is_deduplicated_and_stable() {
        let mut cfg = SweepConfig::new(vec![Suite::Euclid, Suite::Euclid]);
        cfg.n = Some(vec![3, 3]);
        cfg.alpha = Some(vec![0.0]);
        cfg.m = Some(vec![1]);
        cfg.k = Some(vec![0]);
        cfg.ell = Some(vec![0]);
        cfg.samples = 0;
        let a: Vec<String> = expand(&cfg).into_iter().map(|c| c.id).collect();
        let b: Vec<String> = expand(&cfg).into_iter().map(|c| c.id).collect();
        assert_eq!(a, b);
        let unique: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(unique.len(), a.len());
        assert_eq!(a.len(), 6 + 4 + 2 + 3);
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let mut cfg = SweepConfig::new(vec![Suite::Euclid]);
        cfg.n = Some(vec![3, 5]);
        cfg.alpha = Some(vec![0.0]);
        cfg.m = Some(vec![1]);
        cfg.k = Some(vec![1]);
        cfg.ell = Some(vec![1]);
        cfg.samples = 2;
        let one = run(&cfg, Some(1)).unwrap().to_json();
        let four = run(&cfg, Some(4)).unwrap().to_json();
        assert_eq!(one, four);
    }

    #[test]
    fn tolerance_overrides_apply() {
        let mut cfg = SweepConfig::new(vec![Suite::Euclid]);
        cfg.n = Some(vec![3]);
        cfg.alpha = Some(vec![0.0]);
        cfg.m = Some(vec![]);
        cfg.k = Some(vec![]);
        cfg.ell = Some(vec![]);
        cfg.samples = 0;
        cfg.tolerances.identity = 1e-30;
        let doc = run(&cfg, Some(1)).unwrap();
        assert!(doc.cases.iter().all(|c| c.tolerance == 1e-30));
    }
}
