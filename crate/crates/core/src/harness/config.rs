//! Line-oriented experiment configuration.
//!
//! ```text
//! # lattice sweep
//! N = 2
//! p = 4
//! variant = LatticeBalls
//! epsilon = 0.4, 0.3, 0.2, 0.12, 0.08
//! L = 8
//! cells_per_unit = 32
//! cells_per_epsilon = 4
//! modes = solve, concentrate, checks
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key may appear once; the
//! same keys can be overridden from the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::diagnostics::CellWindow;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{PotentialVariant, ProblemSpec};
use crate::solver::{InitialGuess, LineSearch, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    /// Fixed cells per axis.
    Cells(usize),
    /// At least `cells_per_unit` cells per unit length, raised to
    /// `⌈cells_per_epsilon/ε⌉` when given, so that `h ≤ ε/cells_per_epsilon`.
    PerUnit {
        cells_per_unit: usize,
        cells_per_epsilon: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Modes {
    pub solve: bool,
    pub concentrate: bool,
    pub rescale: bool,
    pub limit_compare: bool,
    pub checks: bool,
}

impl Modes {
    pub const NAMES: [&'static str; 5] = ["solve", "concentrate", "rescale", "limit_compare", "checks"];

    fn set(&mut self, name: &str) -> bool {
        let flag = match name {
            "solve" => &mut self.solve,
            "concentrate" => &mut self.concentrate,
            "rescale" => &mut self.rescale,
            "limit_compare" => &mut self.limit_compare,
            "checks" => &mut self.checks,
            _ => return false,
        };
        *flag = true;
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    /// Local H¹ and L^p ratios strictly increase along the ε-list.
    MonotoneRatios,
    /// ‖u‖_{H¹(Ω)} strictly increases along the ε-list.
    BlowUp,
    /// Stencil identity error drops by a factor in [3.5, 4.5] from n/2 to n.
    PsiIdentity,
    /// Every solve converged and passed the boundary-decay certificate.
    Residuals,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::MonotoneRatios, Check::BlowUp, Check::PsiIdentity, Check::Residuals];

    pub fn name(self) -> &'static str {
        match self {
            Check::MonotoneRatios => "monotone_ratios",
            Check::BlowUp => "blow_up",
            Check::PsiIdentity => "psi_identity",
            Check::Residuals => "residuals",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub p: f64,
    pub variant: PotentialVariant,
    /// Strictly decreasing. A single `0` for `LimitSingleBall`.
    pub epsilons: Vec<f64>,
    pub half_width: f64,
    pub resolution: Resolution,
    pub solver: SolverOptions,
    /// Replaces the bump initial guess when set.
    pub init_file: Option<PathBuf>,
    /// Number of starts per ε; starts beyond the first are jittered bumps.
    pub starts: usize,
    pub window: CellWindow,
    pub out_dir: PathBuf,
    pub modes: Modes,
    pub checks: Vec<Check>,
}

impl ExperimentConfig {
    pub fn spec(&self, epsilon: f64) -> Result<ProblemSpec> {
        ProblemSpec::new(self.dim, self.p, epsilon, self.variant)
    }

    pub fn grid(&self, epsilon: f64) -> Result<Grid> {
        match self.resolution {
            Resolution::Cells(n) => Grid::new(self.dim, self.half_width, n),
            Resolution::PerUnit {
                cells_per_unit,
                cells_per_epsilon,
            } => {
                let mut cpu = cells_per_unit;
                if let (Some(k), true) = (cells_per_epsilon, epsilon > 0.0) {
                    // tolerate k/ε landing a hair above an integer
                    cpu = cpu.max((k / epsilon - 1e-9).ceil() as usize);
                }
                Grid::with_cells_per_unit(self.dim, self.half_width, cpu)
            }
        }
    }

    pub fn check_enabled(&self, check: Check) -> bool {
        self.modes.checks && self.checks.contains(&check)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Line(usize),
    Override(usize),
}

struct Entry {
    source: Source,
    raw: String,
    value: String,
}

impl Entry {
    fn location(&self) -> String {
        match self.source {
            Source::Line(k) => format!("line {k}"),
            Source::Override(_) => format!("override `{}`", self.raw),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.location())
    }
}

const KEYS: &[&str] = &[
    "N",
    "p",
    "variant",
    "epsilon",
    "L",
    "n",
    "cells_per_unit",
    "cells_per_epsilon",
    "tol_residual",
    "max_outer",
    "cg_tol",
    "cg_max",
    "init_center",
    "init_amplitude",
    "init_width",
    "init_file",
    "line_search_shrink",
    "line_search_armijo",
    "line_search_initial_step",
    "seed",
    "starts",
    "subsamples",
    "polish_iterations",
    "decay_threshold",
    "omega_half_width",
    "u_half_width",
    "delta",
    "out",
    "modes",
    "checks",
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `key=value` overrides in order.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, entry) = split_entry(content, Source::Line(k + 1))?;
        if let Some(prev) = entries.get(&key) {
            return Err(Error::Parse {
                location: entry.location(),
                message: format!("duplicate key `{key}` (first set at {prev})"),
            });
        }
        entries.insert(key, entry);
    }
    for (i, raw) in overrides.iter().enumerate() {
        let (key, entry) = split_entry(raw.trim(), Source::Override(i))?;
        entries.insert(key, entry);
    }
    Builder { entries }.build()
}

fn split_entry(content: &str, source: Source) -> Result<(String, Entry)> {
    let located = |message: String| {
        let location = match source {
            Source::Line(k) => format!("line {k}"),
            Source::Override(_) => format!("override `{content}`"),
        };
        Error::Parse { location, message }
    };
    let (key, value) = content
        .split_once('=')
        .ok_or_else(|| located("expected `key = value`".into()))?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(located(format!("unknown key `{key}`")));
    }
    Ok((
        key.to_string(),
        Entry {
            source,
            raw: content.to_string(),
            value: value.trim().to_string(),
        },
    ))
}

struct Builder {
    entries: BTreeMap<String, Entry>,
}

impl Builder {
    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value.parse().map(Some).map_err(|_| Error::Parse {
            location: e.location(),
            message: format!("cannot parse `{}` as a value for {key}", e.value),
        })
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse {
                    location: e.location(),
                    message: format!("cannot parse `{}` as a number in {key}", t.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn words(&self, key: &str) -> Option<(&Entry, Vec<&str>)> {
        self.entries.get(key).map(|e| {
            let words = e.value.split(',').map(str::trim).filter(|w| !w.is_empty()).collect();
            (e, words)
        })
    }

    fn at(&self, key: &str) -> String {
        self.entries.get(key).map_or_else(|| "defaults".into(), |e| e.location())
    }

    fn build(self) -> Result<ExperimentConfig> {
        let mut problems: Vec<String> = Vec::new();
        let missing = |problems: &mut Vec<String>, key: &str| problems.push(format!("missing required key `{key}`"));

        let dim: Option<usize> = self.parse("N")?;
        let p: Option<f64> = self.parse("p")?;
        let variant: Option<PotentialVariant> = match self.entries.get("variant") {
            None => None,
            Some(e) => Some(e.value.parse().map_err(|_| Error::Parse {
                location: e.location(),
                message: format!(
                    "unknown variant `{}` (expected one of {})",
                    e.value,
                    PotentialVariant::ALL.map(|v| v.tag()).join(", ")
                ),
            })?),
        };
        let epsilons = self.list("epsilon")?;
        let half_width: Option<f64> = self.parse("L")?;
        let n: Option<usize> = self.parse("n")?;
        let cells_per_unit: Option<usize> = self.parse("cells_per_unit")?;
        let cells_per_epsilon: Option<f64> = self.parse("cells_per_epsilon")?;

        for (key, v) in [("N", dim.is_some()), ("p", p.is_some()), ("variant", variant.is_some()), ("L", half_width.is_some())] {
            if !v {
                missing(&mut problems, key);
            }
        }

        let resolution = match (n, cells_per_unit) {
            (Some(n), None) => {
                if cells_per_epsilon.is_some() {
                    problems.push(format!("{}: cells_per_epsilon needs cells_per_unit, not n", self.at("cells_per_epsilon")));
                }
                Some(Resolution::Cells(n))
            }
            (None, Some(c)) => {
                if let Some(k) = cells_per_epsilon {
                    if !(k > 0.0 && k.is_finite()) {
                        problems.push(format!("{}: cells_per_epsilon={k} must be positive", self.at("cells_per_epsilon")));
                    }
                }
                Some(Resolution::PerUnit {
                    cells_per_unit: c,
                    cells_per_epsilon,
                })
            }
            (Some(_), Some(_)) => {
                problems.push(format!("{}: give either n or cells_per_unit, not both", self.at("cells_per_unit")));
                None
            }
            (None, None) => {
                problems.push("missing grid resolution: set `n` or `cells_per_unit`".into());
                None
            }
        };

        let epsilons = match (variant, epsilons) {
            (Some(PotentialVariant::LimitSingleBall), None) => Some(vec![0.0]),
            (Some(PotentialVariant::LimitSingleBall), Some(_)) => {
                problems.push(format!("{}: LimitSingleBall takes no epsilon", self.at("epsilon")));
                None
            }
            (_, None) => {
                missing(&mut problems, "epsilon");
                None
            }
            (_, Some(list)) => {
                if let Some(w) = list.windows(2).find(|w| !(w[1] < w[0])) {
                    problems.push(format!(
                        "{}: epsilon list must be strictly decreasing ({} then {})",
                        self.at("epsilon"),
                        w[0],
                        w[1]
                    ));
                }
                Some(list)
            }
        };

        if let (Some(dim), Some(p), Some(variant), Some(eps)) = (dim, p, variant, &epsilons) {
            let mut seen = Vec::new();
            for &e in eps {
                if let Err(err) = ProblemSpec::new(dim, p, e, variant) {
                    let msg = match err {
                        Error::InvalidSpec(m) => m,
                        other => other.to_string(),
                    };
                    if !seen.contains(&msg) {
                        let key = if msg.starts_with("epsilon") { "epsilon" } else if msg.starts_with("dimension") { "N" } else { "p" };
                        problems.push(format!("{}: {msg}", self.at(key)));
                        seen.push(msg);
                    }
                }
            }
        }

        let mut solver = SolverOptions::default();
        let defaults = LineSearch::default();
        solver.tol_residual = self.parse("tol_residual")?.unwrap_or(solver.tol_residual);
        solver.max_outer = self.parse("max_outer")?.unwrap_or(solver.max_outer);
        solver.cg_tol = self.parse("cg_tol")?.unwrap_or(solver.cg_tol);
        solver.cg_max = self.parse("cg_max")?;
        solver.seed = self.parse("seed")?.unwrap_or(0);
        solver.subsamples = self.parse("subsamples")?.unwrap_or(solver.subsamples);
        solver.polish_iterations = self.parse("polish_iterations")?.unwrap_or(solver.polish_iterations);
        solver.decay_threshold = self.parse("decay_threshold")?.unwrap_or(solver.decay_threshold);
        solver.line_search = LineSearch {
            shrink: self.parse("line_search_shrink")?.unwrap_or(defaults.shrink),
            armijo: self.parse("line_search_armijo")?.unwrap_or(defaults.armijo),
            initial_step: self.parse("line_search_initial_step")?.unwrap_or(defaults.initial_step),
        };
        let center = self.list("init_center")?.unwrap_or_else(|| vec![0.0; dim.unwrap_or(2)]);
        if let Some(d) = dim {
            if center.len() != d {
                problems.push(format!("{}: init_center has {} coordinates, N={d}", self.at("init_center"), center.len()));
            }
        }
        solver.init = InitialGuess::Bump {
            center,
            amplitude: self.parse("init_amplitude")?.unwrap_or(1.0),
            width: self.parse("init_width")?,
        };
        for (key, ok) in [
            ("tol_residual", solver.tol_residual > 0.0),
            ("max_outer", solver.max_outer > 0),
            ("cg_tol", solver.cg_tol > 0.0),
            ("cg_max", solver.cg_max != Some(0)),
            ("subsamples", solver.subsamples > 0),
            ("decay_threshold", solver.decay_threshold > 0.0),
            ("line_search_shrink", solver.line_search.shrink > 0.0 && solver.line_search.shrink < 1.0),
            ("line_search_armijo", solver.line_search.armijo > 0.0 && solver.line_search.armijo < 1.0),
            ("line_search_initial_step", solver.line_search.initial_step > 0.0),
        ] {
            if !ok {
                problems.push(format!("{}: {key} is out of range", self.at(key)));
            }
        }
        if let InitialGuess::Bump { amplitude, width, .. } = &solver.init {
            if !(*amplitude != 0.0 && amplitude.is_finite()) {
                problems.push(format!("{}: init_amplitude must be nonzero", self.at("init_amplitude")));
            }
            if width.is_some_and(|w| !(w > 0.0)) {
                problems.push(format!("{}: init_width must be positive", self.at("init_width")));
            }
        }
        let init_file = self.entries.get("init_file").map(|e| PathBuf::from(&e.value));

        let starts: usize = self.parse("starts")?.unwrap_or(1);
        if starts == 0 {
            problems.push(format!("{}: starts must be at least 1", self.at("starts")));
        }

        let omega: f64 = self.parse("omega_half_width")?.unwrap_or(0.625);
        let u_half: f64 = self.parse("u_half_width")?.unwrap_or(1.6);
        let delta: f64 = self.parse("delta")?.unwrap_or(0.45);
        let window = match CellWindow::new(dim.unwrap_or(2).max(1), omega, u_half, delta) {
            Ok(w) => Some(w),
            Err(e) => {
                problems.push(format!("window ({}): {e}", self.at("delta")));
                None
            }
        };
        if let (Some(l), Some(w)) = (half_width, &window) {
            if l <= w.u_hi[0] {
                problems.push(format!("{}: L={l} does not contain U = (−{u_half}, {u_half})^N", self.at("L")));
            }
        }

        let mut modes = Modes::default();
        match self.words("modes") {
            None => {
                modes.solve = true;
                modes.concentrate = true;
                modes.checks = true;
            }
            Some((e, words)) => {
                for w in words {
                    if !modes.set(w) {
                        problems.push(format!("{e}: unknown mode `{w}` (expected one of {})", Modes::NAMES.join(", ")));
                    }
                }
            }
        }
        // every other mode needs the solutions
        modes.solve = true;
        if let Some(v) = variant {
            if (modes.rescale || modes.limit_compare)
                && !matches!(v, PotentialVariant::LatticeBalls | PotentialVariant::SingleBall)
            {
                problems.push(format!("{}: rescale and limit_compare need LatticeBalls or SingleBall", self.at("modes")));
            }
        }

        let mut checks = Vec::new();
        match self.words("checks") {
            None => checks.extend(Check::ALL),
            Some((e, words)) => {
                for w in words {
                    match Check::ALL.into_iter().find(|c| c.name() == w) {
                        Some(c) if !checks.contains(&c) => checks.push(c),
                        Some(_) => {}
                        None => problems.push(format!(
                            "{e}: unknown check `{w}` (expected one of {})",
                            Check::ALL.map(Check::name).join(", ")
                        )),
                    }
                }
            }
        }
        checks.sort();

        let out_dir = self.entries.get("out").map_or_else(|| PathBuf::from("results"), |e| PathBuf::from(&e.value));

        let config = match (dim, p, variant, epsilons, half_width, resolution, window) {
            (Some(dim), Some(p), Some(variant), Some(epsilons), Some(half_width), Some(resolution), Some(window))
                if problems.is_empty() =>
            {
                ExperimentConfig {
                    dim,
                    p,
                    variant,
                    epsilons,
                    half_width,
                    resolution,
                    solver,
                    init_file,
                    starts,
                    window,
                    out_dir,
                    modes,
                    checks,
                }
            }
            _ => return Err(Error::Validation(problems)),
        };
        for &eps in &config.epsilons {
            let at = self.at(if n.is_some() { "n" } else { "cells_per_unit" });
            match config.grid(eps) {
                Err(e) => {
                    problems.push(format!("{at} (ε = {eps}): {e}"));
                    break;
                }
                Ok(g) if g.cells_per_unit().is_none() => {
                    problems.push(format!(
                        "{at}: {} cells over a width of {} is not a whole number per unit, so lattice shifts are impossible",
                        g.cells_per_axis(),
                        2.0 * config.half_width
                    ));
                    break;
                }
                Ok(_) => {}
            }
        }
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(Error::Validation(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "N = 2\np = 4\nvariant = LatticeBalls\nepsilon = 0.3\nL = 8\nn = 256\n";

    fn problems(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Validation(v)) => v,
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!((c.dim, c.p, c.variant), (2, 4.0, PotentialVariant::LatticeBalls));
        assert_eq!(c.epsilons, vec![0.3]);
        assert_eq!(c.resolution, Resolution::Cells(256));
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(c.starts, 1);
        assert_eq!(c.window, CellWindow::new(2, 0.625, 1.6, 0.45).unwrap());
        assert!(c.modes.solve && c.modes.concentrate && c.modes.checks);
        assert!(!c.modes.rescale && !c.modes.limit_compare);
        assert_eq!(c.checks, Check::ALL.to_vec());
        assert_eq!(c.grid(0.3).unwrap().cells_per_axis(), 256);
    }

    #[test]
    fn comments_blank_lines_and_spacing() {
        let text = "# header\n\nN=2   # inline\n  p =4\nvariant= singleball\nepsilon = 0.3\nL = 6\nn = 96\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.variant, PotentialVariant::SingleBall);
    }

    #[test]
    fn exponent_boundaries_rejected() {
        let p2 = problems(&MINIMAL.replace("p = 4", "p = 2"));
        assert_eq!(p2, vec!["line 2: p=2 must lie in the open interval (2, 2*)".to_string()]);
        let n3 = MINIMAL.replace("N = 2", "N = 3").replace("p = 4", "p = 6");
        assert_eq!(problems(&n3), vec!["line 2: p=6 exceeds 2*=6 for N=3".to_string()]);
        assert!(parse_config(&MINIMAL.replace("N = 2", "N = 3").replace("p = 4", "p = 5.9")).is_ok());
    }

    #[test]
    fn epsilon_list_must_decrease() {
        let bad = problems(&MINIMAL.replace("epsilon = 0.3", "epsilon = 0.3, 0.2, 0.2"));
        assert!(bad[0].starts_with("line 4: epsilon list must be strictly decreasing"), "{bad:?}");
        let out = problems(&MINIMAL.replace("epsilon = 0.3", "epsilon = 0.5"));
        assert!(out[0].contains("must lie in (0, 1/2)"), "{out:?}");
    }

    #[test]
    fn syntax_errors_carry_locations() {
        match parse_config("N = 2\nbogus = 1\n") {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "line 2");
                assert!(message.contains("unknown key"));
            }
            other => panic!("{other:?}"),
        }
        match parse_config("N = 2\np\n") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("{other:?}"),
        }
        match parse_config("N = 2\nN = 3\n") {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "line 2");
                assert!(message.contains("line 1"));
            }
            other => panic!("{other:?}"),
        }
        match parse_config(&MINIMAL.replace("n = 256", "n = many")) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 6"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_keys_are_all_reported() {
        let v = problems("N = 2\n");
        assert!(v.iter().any(|m| m.contains("`p`")));
        assert!(v.iter().any(|m| m.contains("`variant`")));
        assert!(v.iter().any(|m| m.contains("`L`")));
        assert!(v.iter().any(|m| m.contains("resolution")));
    }

    #[test]
    fn overrides_replace_file_values() {
        let c = parse_config_with_overrides(MINIMAL, &["n=128".into(), "epsilon = 0.25,0.2".into()]).unwrap();
        assert_eq!(c.resolution, Resolution::Cells(128));
        assert_eq!(c.epsilons, vec![0.25, 0.2]);
        match parse_config_with_overrides(MINIMAL, &["p=7x".into()]) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "override `p=7x`"),
            other => panic!("{other:?}"),
        }
        let v = match parse_config_with_overrides(MINIMAL, &["p=2".into()]) {
            Err(Error::Validation(v)) => v,
            other => panic!("{other:?}"),
        };
        assert!(v[0].starts_with("override `p=2`"));
    }

    #[test]
    fn per_unit_resolution_tracks_epsilon() {
        let text = MINIMAL
            .replace("n = 256", "cells_per_unit = 32\ncells_per_epsilon = 4")
            .replace("epsilon = 0.3", "epsilon = 0.4, 0.3, 0.2, 0.12, 0.08");
        let c = parse_config(&text).unwrap();
        let n: Vec<usize> = c.epsilons.iter().map(|&e| c.grid(e).unwrap().cells_per_axis()).collect();
        assert_eq!(n, vec![512, 512, 512, 544, 800]);
        for &e in &c.epsilons {
            assert!(c.grid(e).unwrap().spacing() <= e / 4.0 + 1e-15);
        }
    }

    #[test]
    fn modes_and_checks() {
        let c = parse_config(&format!("{MINIMAL}modes = rescale\nchecks = blow_up, residuals\n")).unwrap();
        assert!(c.modes.solve && c.modes.rescale && !c.modes.concentrate && !c.modes.checks);
        assert_eq!(c.checks, vec![Check::BlowUp, Check::Residuals]);
        assert!(!c.check_enabled(Check::BlowUp));
        let v = problems(&format!("{MINIMAL}modes = solve, plot\n"));
        assert!(v[0].contains("unknown mode `plot`"));
        let v = problems(&MINIMAL.replace("LatticeBalls", "RescaledLattice").replace("n = 256", "n = 256\nmodes = rescale"));
        assert!(v[0].contains("rescale and limit_compare"));
    }

    #[test]
    fn limit_variant_needs_no_epsilon() {
        let text = "N = 3\np = 4\nvariant = LimitSingleBall\nL = 4\nn = 32\n";
        assert_eq!(parse_config(text).unwrap().epsilons, vec![0.0]);
        assert!(parse_config(&format!("{text}epsilon = 0.2\n")).is_err());
    }

    #[test]
    fn window_is_validated() {
        let v = problems(&format!("{MINIMAL}delta = 0.7\n"));
        assert!(v[0].starts_with("window (line 7)"), "{v:?}");
        let v = problems(&MINIMAL.replace("L = 8", "L = 1.5"));
        assert!(v[0].contains("does not contain U"), "{v:?}");
    }
}
