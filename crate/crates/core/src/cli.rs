//! Scenario runner behind the `abe-locc` binary.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::protocols::{
    activation_reference, default_labels, fig2_broken, prepare_smolin_locc, scenario_activation, scenario_fig2,
    scenario_fig3, scenario_relay, Chain, ProtocolError, Transcript, FIG2_NODES,
};
use crate::verification::{
    depolarization_check, pairwise_undistillability, singlet_claim, smolin_battery, smolin_reference, state_claim,
    CertificationReport, Check, Claim, Evidence, Status, Tolerances,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// `order = all` is refused above this chain length.
pub const MAX_ALL_ORDERS_LENGTH: usize = 6;
const MAX_CHAIN_LENGTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Smolin,
    Chain,
    Fig2,
    Fig3,
    Activation,
    Relay,
    Remark3,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Smolin => "smolin",
            Scenario::Chain => "chain",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Activation => "activation",
            Scenario::Relay => "relay",
            Scenario::Remark3 => "remark3",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[default]
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Order {
    /// Left to right.
    #[default]
    Default,
    /// Every permutation of the interior nodes.
    All,
    Given(Vec<String>),
}

#[derive(Parser, Debug)]
#[command(name = "abe-locc", version, about = "Exact LOCC protocol runs over singlet chains with bound-entangled links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Four-party state built from two singlets, with its certification battery
    Smolin(Opts),
    /// Singlet chain with optional bound-entangled substitutions and removed links
    Chain(Opts),
    /// Seven-link chain with two bound-entangled groups merged onto A..E
    Fig2(Opts),
    /// Seven-link chain with three bound-entangled groups
    Fig3(Opts),
    /// Three-group chain stopped after C's measurement
    Activation(Opts),
    /// Four-link chain made only of bound-entangled links
    Relay(Opts),
    /// Two-group chain with one connecting singlet missing
    Remark3(Opts),
    /// Scenario named by the `scenario` key of the config file
    Run(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// File of `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    tolerance_eq: Option<f64>,
    #[arg(long)]
    tolerance_ppt: Option<f64>,
    /// Comma-separated interior nodes, or `all`
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    chain_length: Option<usize>,
    /// Pair of 1-based links `i,j`; repeatable
    #[arg(long)]
    substitute: Vec<String>,
    /// Link number or node pair such as `BF`; repeatable
    #[arg(long)]
    remove_link: Vec<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
}

/// A fully validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub chain_length: usize,
    pub substitutions: Vec<(usize, usize)>,
    pub removed_links: Vec<usize>,
    pub order: Order,
    pub tolerances: Tolerances,
    pub format: Format,
    pub mode: Mode,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn config_error(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Settings as written, before validation against the scenario.
#[derive(Clone, Debug, Default)]
struct RawConfig {
    scenario: Option<Scenario>,
    chain_length: Option<usize>,
    substitutions: Option<Vec<(usize, usize)>>,
    removed: Option<Vec<String>>,
    order: Option<Order>,
    tolerance_eq: Option<f64>,
    tolerance_ppt: Option<f64>,
    format: Option<Format>,
    mode: Option<Mode>,
    seed: Option<u64>,
}

fn parse_number<T: std::str::FromStr>(line: Option<usize>, field: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| config_error(line, field, format!("cannot parse `{}`", v.trim())))
}

fn parse_enum<T: ValueEnum>(line: Option<usize>, field: &str, v: &str) -> Result<T, ConfigError> {
    T::from_str(v.trim(), true).map_err(|_| config_error(line, field, format!("unknown value `{}`", v.trim())))
}

/// Every integer in `v`, read pairwise: `1,3`, `(1,3);(2,4)` and `[(1,3),(2,4)]`
/// all parse.
fn parse_pairs(line: Option<usize>, field: &str, v: &str) -> Result<Vec<(usize, usize)>, ConfigError> {
    let numbers: Vec<usize> = v
        .split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .map(|s| parse_number(line, field, s))
        .collect::<Result<_, _>>()?;
    if numbers.is_empty() || numbers.len() % 2 != 0 {
        return Err(config_error(line, field, format!("expected pairs of link numbers, got `{}`", v.trim())));
    }
    Ok(numbers.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn parse_list(v: &str) -> Vec<String> {
    v.split(|c: char| c == ',' || c == ';' || c.is_whitespace() || c == '[' || c == ']')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_order(v: &str) -> Order {
    if v.trim().eq_ignore_ascii_case("all") {
        Order::All
    } else {
        Order::Given(parse_list(v))
    }
}

impl RawConfig {
    fn from_file_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (n, full) in text.lines().enumerate() {
            let line = Some(n + 1);
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, content, "expected `key = value`"))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "scenario" => raw.scenario = Some(parse_enum(line, &key, value)?),
                "chain_length" => raw.chain_length = Some(parse_number(line, &key, value)?),
                "substitute" | "substitutions" => raw
                    .substitutions
                    .get_or_insert_with(Vec::new)
                    .extend(parse_pairs(line, &key, value)?),
                "remove_link" | "removed_links" => raw.removed.get_or_insert_with(Vec::new).extend(parse_list(value)),
                "order" => raw.order = Some(parse_order(value)),
                "tolerance_eq" => raw.tolerance_eq = Some(parse_number(line, &key, value)?),
                "tolerance_ppt" => raw.tolerance_ppt = Some(parse_number(line, &key, value)?),
                "format" => raw.format = Some(parse_enum(line, &key, value)?),
                "mode" => raw.mode = Some(parse_enum(line, &key, value)?),
                "seed" => raw.seed = Some(parse_number(line, &key, value)?),
                _ => return Err(config_error(line, &key, "unknown key")),
            }
        }
        Ok(raw)
    }

    fn override_with(&mut self, opts: &Opts) -> Result<(), ConfigError> {
        if !opts.substitute.is_empty() {
            let mut subs = Vec::new();
            for s in &opts.substitute {
                subs.extend(parse_pairs(None, "--substitute", s)?);
            }
            self.substitutions = Some(subs);
        }
        if !opts.remove_link.is_empty() {
            self.removed = Some(opts.remove_link.iter().flat_map(|s| parse_list(s)).collect());
        }
        if let Some(o) = &opts.order {
            self.order = Some(parse_order(o));
        }
        self.chain_length = opts.chain_length.or(self.chain_length);
        self.tolerance_eq = opts.tolerance_eq.or(self.tolerance_eq);
        self.tolerance_ppt = opts.tolerance_ppt.or(self.tolerance_ppt);
        self.format = opts.format.or(self.format);
        self.mode = opts.mode.or(self.mode);
        self.seed = opts.seed.or(self.seed);
        Ok(())
    }

    fn validate(self) -> Result<ScenarioConfig, ConfigError> {
        let scenario = self
            .scenario
            .ok_or_else(|| config_error(None, "scenario", "missing; give a subcommand or a `scenario` key"))?;
        let chain = scenario == Scenario::Chain;
        let only_chain = |field: &str| config_error(None, field, format!("applies only to scenario chain, not {}", scenario.name()));
        if !chain {
            if self.chain_length.is_some() {
                return Err(only_chain("chain_length"));
            }
            if self.substitutions.is_some() {
                return Err(only_chain("substitute"));
            }
            if self.order.is_some() {
                return Err(only_chain("order"));
            }
            if self.seed.is_some() {
                return Err(only_chain("seed"));
            }
            if self.mode == Some(Mode::Sampled) {
                return Err(config_error(
                    None,
                    "mode",
                    format!("scenario {} is a certification battery and runs exhaustively only", scenario.name()),
                ));
            }
            if self.removed.is_some() && scenario != Scenario::Remark3 {
                return Err(config_error(None, "remove_link", "applies only to scenarios chain and remark3"));
            }
        }
        let mut tolerances = Tolerances::default();
        for (field, v, slot) in [
            ("tolerance_eq", self.tolerance_eq, &mut tolerances.eq),
            ("tolerance_ppt", self.tolerance_ppt, &mut tolerances.ppt),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(config_error(None, field, "must be a positive number"));
                }
                *slot = v;
            }
        }

        let chain_length = self.chain_length.unwrap_or(3);
        let labels: Vec<String> = match scenario {
            Scenario::Remark3 => FIG2_NODES.iter().map(|s| s.to_string()).collect(),
            _ => default_labels(chain_length),
        };
        let removed_links = self
            .removed
            .unwrap_or_default()
            .iter()
            .map(|s| resolve_link(s, &labels))
            .collect::<Result<Vec<_>, _>>()?;
        if removed_links.iter().enumerate().any(|(k, l)| removed_links[..k].contains(l)) {
            return Err(config_error(None, "remove_link", "a link is listed twice"));
        }
        let substitutions = self.substitutions.unwrap_or_default();
        let order = self.order.unwrap_or_default();

        if chain {
            if chain_length == 0 || chain_length > MAX_CHAIN_LENGTH {
                return Err(config_error(None, "chain_length", format!("must be between 1 and {MAX_CHAIN_LENGTH}")));
            }
            let mut used: Vec<usize> = Vec::new();
            for &(i, j) in &substitutions {
                for l in [i, j] {
                    if l == 0 || l > chain_length {
                        return Err(config_error(None, "substitute", format!("no link {l} in a chain of {chain_length}")));
                    }
                    if used.contains(&l) {
                        return Err(config_error(None, "substitute", format!("link {l} is used twice")));
                    }
                    if removed_links.contains(&l) {
                        return Err(config_error(None, "substitute", format!("link {l} is removed")));
                    }
                    used.push(l);
                }
                if i == j {
                    return Err(config_error(None, "substitute", "a link cannot be paired with itself"));
                }
            }
            if order == Order::All && chain_length > MAX_ALL_ORDERS_LENGTH {
                return Err(config_error(
                    None,
                    "order",
                    format!("`all` needs chain_length at most {MAX_ALL_ORDERS_LENGTH}"),
                ));
            }
        }
        if scenario == Scenario::Remark3 {
            if let Some(l) = removed_links.iter().find(|l| ![2, 4, 6].contains(*l)) {
                return Err(config_error(
                    None,
                    "remove_link",
                    format!("link {l} is not a connecting singlet; choose among 2 (BF), 4 (GC), 6 (DH)"),
                ));
            }
        }
        Ok(ScenarioConfig {
            scenario,
            chain_length,
            substitutions,
            removed_links: if scenario == Scenario::Remark3 && removed_links.is_empty() {
                vec![2, 4, 6]
            } else {
                removed_links
            },
            order,
            tolerances,
            format: self.format.unwrap_or_default(),
            mode: self.mode.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
        })
    }
}

/// A link number, or the two adjacent node labels it joins (either order).
fn resolve_link(s: &str, labels: &[String]) -> Result<usize, ConfigError> {
    if let Ok(n) = s.parse::<usize>() {
        if n == 0 || n >= labels.len() {
            return Err(config_error(None, "remove_link", format!("no link {n} in a chain of {}", labels.len() - 1)));
        }
        return Ok(n);
    }
    for k in 0..labels.len() - 1 {
        let (a, b) = (&labels[k], &labels[k + 1]);
        if *s == format!("{a}{b}") || *s == format!("{b}{a}") {
            return Ok(k + 1);
        }
    }
    Err(config_error(None, "remove_link", format!("`{s}` names no link of this chain")))
}

/// The emitted document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub version: u32,
    pub scenario: String,
    pub claims: Vec<Claim>,
    pub transcript: Transcript,
}

impl Output {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(Claim::passed)
    }
}

pub fn emit_report(out: &Output, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(out).expect("reports serialize") + "\n",
        Format::Text => emit_text(out),
    }
}

fn describe(check: &Check) -> String {
    match check {
        Check::Info => String::new(),
        Check::AtMost { bound } => format!("(<= {bound:e})"),
        Check::AtLeast { bound } if bound.abs() < 1e-3 => format!("(>= {bound:e})"),
        Check::AtLeast { bound } => format!("(>= {bound})"),
        Check::Near { target, tolerance } => format!("(= {target} ± {tolerance:e})"),
    }
}

fn emit_text(out: &Output) -> String {
    let mut s = format!("scenario {}\n", out.scenario);
    for c in &out.claims {
        let status = if c.status == Status::Pass { "PASS" } else { "FAIL" };
        s += &format!("{status}  {}  [{}]  {}\n", c.id, c.anchor, c.statement);
        for e in &c.evidence {
            let mark = if e.holds() { ' ' } else { '!' };
            s += &format!("     {mark} {:<58} {:>22.15e} {}\n", e.name, e.value, describe(&e.check));
        }
    }
    let passed = out.claims.iter().filter(|c| c.passed()).count();
    s += &format!(
        "transcript: {} events, {} singlets consumed\n{passed}/{} claims pass\n",
        out.transcript.events().len(),
        out.transcript.singlets_consumed(),
        out.claims.len()
    );
    s
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Protocol(ProtocolError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "invalid configuration: {e}"),
            RunError::Protocol(e) => write!(f, "{e}"),
        }
    }
}

impl From<ProtocolError> for RunError {
    fn from(e: ProtocolError) -> Self {
        RunError::Protocol(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl RunError {
    /// Configuration mistakes exit 2, everything else 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Protocol(e) => match e {
                ProtocolError::InvalidLink(..)
                | ProtocolError::NotSinglet(_)
                | ProtocolError::SameLink
                | ProtocolError::SharedSender(..)
                | ProtocolError::UnknownNode(_)
                | ProtocolError::NotInterior(_)
                | ProtocolError::InvalidOrder(_)
                | ProtocolError::InvalidConfig(_) => EXIT_CONFIG,
                _ => EXIT_INTERNAL,
            },
        }
    }
}

/// Builds the run description from a config file (if any) and flags.
fn resolve(scenario: Option<Scenario>, opts: &Opts) -> Result<ScenarioConfig, ConfigError> {
    let mut raw = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(None, "config", format!("{}: {e}", path.display())))?;
            RawConfig::from_file_text(&text)?
        }
        None => RawConfig::default(),
    };
    raw.override_with(opts)?;
    if let Some(s) = scenario {
        raw.scenario = Some(s);
    }
    raw.validate()
}

/// Runs the scenario and its certification claims.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Output, RunError> {
    let tol = &config.tolerances;
    let (report, transcript) = match config.scenario {
        Scenario::Smolin => {
            let (e, t) = prepare_smolin_locc(["A", "B", "C", "D"])?;
            (smolin_battery(&e, tol)?, t)
        }
        Scenario::Chain => run_chain(config)?,
        Scenario::Fig2 => run_fig2(tol)?,
        Scenario::Fig3 => run_fig3(tol)?,
        Scenario::Activation => run_activation(tol)?,
        Scenario::Relay => run_relay(tol)?,
        Scenario::Remark3 => run_remark3(&config.removed_links, tol)?,
    };
    Ok(Output {
        version: 1,
        scenario: config.scenario.name().to_string(),
        claims: report.claims,
        transcript,
    })
}

fn group_claims(chain: &Chain, tol: &Tolerances) -> Result<CertificationReport, ProtocolError> {
    let reference = smolin_reference();
    let mut report = CertificationReport::default();
    for g in 0..chain.config().groups.len() {
        let qubits = chain.group_qubits(g);
        let owners: Vec<&str> = qubits.iter().map(|&q| chain.protocol().registry().owner(q)).collect();
        report.push(state_claim(
            &format!("group-{g}-state"),
            "four-party-state",
            &format!("group {g} on {} is the four-party bound-entangled state", owners.join("")),
            chain.protocol(),
            &qubits,
            &reference,
            tol,
        )?);
    }
    Ok(report)
}

/// One claim per connected piece: an end singlet if every group touching
/// it lies inside it, the maximally mixed state otherwise.
fn piece_claims(chain: &Chain, tol: &Tolerances) -> Result<CertificationReport, ProtocolError> {
    let mut report = CertificationReport::default();
    let pieces = chain.config().pieces();
    for piece in &pieces {
        let claim = if piece.complete {
            singlet_claim(
                &format!("singlet-{}-{}", piece.left, piece.right),
                "chain-swapping",
                chain.protocol(),
                &piece.left,
                &piece.right,
                tol,
            )?
        } else {
            depolarization_check(chain.protocol(), &piece.left, &piece.right, tol)?
        };
        report.push(claim);
    }
    let nodes = &chain.config().nodes;
    let (first, last) = (&nodes[0], &nodes[nodes.len() - 1]);
    if pieces.len() > 1 {
        report.push(depolarization_check(chain.protocol(), first, last, tol)?);
    }
    Ok(report)
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

fn end_states(chain: &Chain) -> Result<Vec<DensityMatrix>, ProtocolError> {
    chain
        .config()
        .pieces()
        .iter()
        .map(|p| {
            let q = [chain.protocol().sole_qubit(&p.left)?, chain.protocol().sole_qubit(&p.right)?];
            chain.protocol().average_state(&q)
        })
        .collect()
}

fn run_chain(config: &ScenarioConfig) -> Result<(CertificationReport, Transcript), ProtocolError> {
    let tol = &config.tolerances;
    let mut chain = Chain::with_labels(&default_labels(config.chain_length), &config.removed_links)?;
    if config.mode == Mode::Sampled {
        chain.protocol_mut().reseed(config.seed);
    }
    for &(i, j) in &config.substitutions {
        chain.substitute_abe(i, j)?;
    }
    let mut report = CertificationReport::default();
    if config.mode == Mode::Exhaustive {
        report.extend(group_claims(&chain, tol)?);
    }
    let prepared = chain.clone();
    match &config.order {
        Order::Default => chain.run_end_to_end(None)?,
        Order::Given(o) => chain.run_end_to_end(Some(o))?,
        Order::All => {
            let reference_states = {
                chain.run_end_to_end(None)?;
                end_states(&chain)?
            };
            let orders = permutations(&prepared.config().interior_nodes());
            let mut worst: f64 = 0.0;
            let mut failing = 0usize;
            for o in &orders {
                let mut c = prepared.clone();
                c.run_end_to_end(Some(o))?;
                for (a, b) in end_states(&c)?.iter().zip(&reference_states) {
                    worst = worst.max(a.max_abs_diff(b));
                }
                failing += piece_claims(&c, tol)?.claims.iter().filter(|c| !c.passed()).count();
            }
            report.push(Claim::new(
                "order-independence",
                "chain-swapping",
                "every order of the interior measurements gives the same end states and passes the same claims",
                tol.eq,
                vec![
                    Evidence::new("orderings", orders.len() as f64, Check::Info),
                    Evidence::new("max entry difference across orderings", worst, Check::AtMost { bound: tol.eq }),
                    Evidence::new("failing claims over all orderings", failing as f64, Check::AtMost { bound: 0.0 }),
                ],
            ));
        }
    }
    report.extend(piece_claims(&chain, tol)?);
    Ok((report, chain.into_protocol().transcript().clone()))
}

fn run_fig2(tol: &Tolerances) -> Result<(CertificationReport, Transcript), ProtocolError> {
    let mut chain = scenario_fig2()?;
    let mut report = group_claims(&chain, tol)?;
    let mut joint: Vec<usize> = chain.group_qubits(0);
    joint.extend(chain.group_qubits(1));
    let reference = smolin_reference();
    report.push(state_claim(
        "groups-product",
        "two-group-superactivation",
        "the two groups are independent: their joint state is the product of two four-party states",
        chain.protocol(),
        &joint,
        &reference.tensor(&reference)?,
        tol,
    )?);
    chain.run_end_to_end(None)?;
    report.push(singlet_claim("end-to-end-singlet", "two-group-superactivation", chain.protocol(), "A", "E", tol)?);
    Ok((report, chain.into_protocol().transcript().clone()))
}

fn run_fig3(tol: &Tolerances) -> Result<(CertificationReport, Transcript), ProtocolError> {
    let mut chain = scenario_fig3()?;
    let mut report = group_claims(&chain, tol)?;
    chain.run_end_to_end(None)?;
    report.push(singlet_claim("end-to-end-singlet", "three-group-superactivation", chain.protocol(), "A", "E", tol)?);
    Ok((report, chain.into_protocol().transcript().clone()))
}

fn run_activation(tol: &Tolerances) -> Result<(CertificationReport, Transcript), ProtocolError> {
    let act = scenario_activation()?;
    let run = act.chain.protocol();
    let (reference, rq) = activation_reference()?;
    let mut report = CertificationReport::default();
    report.push(state_claim(
        "rho-x-construction",
        "activation",
        "the six-party state equals one party's Bell measurement on two four-party states sharing that party",
        run,
        &act.rho_x,
        &reference.average_state(&rq)?,
        tol,
    )?);
    report.push(state_claim(
        "auxiliary-state",
        "activation",
        "the auxiliary group on BFDH is the four-party bound-entangled state",
        run,
        &act.auxiliary,
        &smolin_reference(),
        tol,
    )?);
    let mut ppt = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            let rho = run.average_state(&[act.rho_x[i], act.rho_x[j]])?;
            let cert = rho.ppt_certificate(&crate::density::Cut::new(2, &[0])?, tol.ppt)?;
            ppt.push(Evidence::new(
                format!("{}{} min eigenvalue of partial transpose", act.parties[i], act.parties[j]),
                cert.min_eigenvalue,
                Check::AtLeast { bound: -tol.ppt },
            ));
        }
    }
    report.push(Claim::new(
        "rho-x-pairwise-ppt",
        "activation",
        "every two-party marginal of the six-party state is PPT; this is a necessary condition only \
         and does not by itself decide bound entanglement of the six-party state",
        tol.ppt,
        ppt,
    ));
    let done = act.complete()?;
    report.push(singlet_claim("activated-singlet", "activation", done.protocol(), "A", "E", tol)?);
    Ok((report, done.into_protocol().transcript().clone()))
}

fn run_relay(tol: &Tolerances) -> Result<(CertificationReport, Transcript), ProtocolError> {
    let mut chain = scenario_relay()?;
    let nodes = chain.config().nodes.clone();
    let mut pairs = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            pairs.push((nodes[i].clone(), nodes[j].clone()));
        }
    }
    let mut report = pairwise_undistillability(chain.protocol(), &pairs, tol)?;
    chain.run_end_to_end(None)?;
    report.push(singlet_claim("relay-singlet", "relay-channel", chain.protocol(), "A", "E", tol)?);
    Ok((report, chain.into_protocol().transcript().clone()))
}

fn run_remark3(removed: &[usize], tol: &Tolerances) -> Result<(CertificationReport, Transcript), ProtocolError> {
    let mut report = CertificationReport::default();
    let mut transcript = Transcript::default();
    for &r in removed {
        let mut chain = fig2_broken(r)?;
        chain.run_end_to_end(None)?;
        let mut claim = depolarization_check(chain.protocol(), "A", "E", tol)?;
        claim.id = format!("without-{}{}-depolarized", FIG2_NODES[r - 1], FIG2_NODES[r]);
        report.push(claim);
        transcript.extend(chain.protocol().transcript());
    }
    let mut intact = scenario_fig2()?;
    intact.run_end_to_end(None)?;
    report.push(singlet_claim("intact-singlet", "broken-chain", intact.protocol(), "A", "E", tol)?);
    Ok((report, transcript))
}

/// Parses `args`, runs the scenario and writes the report to `out`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (scenario, opts) = match &cli.command {
        Command::Smolin(o) => (Some(Scenario::Smolin), o),
        Command::Chain(o) => (Some(Scenario::Chain), o),
        Command::Fig2(o) => (Some(Scenario::Fig2), o),
        Command::Fig3(o) => (Some(Scenario::Fig3), o),
        Command::Activation(o) => (Some(Scenario::Activation), o),
        Command::Relay(o) => (Some(Scenario::Relay), o),
        Command::Remark3(o) => (Some(Scenario::Remark3), o),
        Command::Run(o) => (None, o),
    };
    if scenario.is_none() && opts.config.is_none() {
        eprintln!("invalid configuration: run needs --config");
        return EXIT_CONFIG;
    }
    let result = resolve(scenario, opts)
        .map_err(RunError::from)
        .and_then(|config| Ok((run_scenario(&config)?, config.format)));
    match result {
        Ok((output, format)) => {
            if out.write_all(emit_report(&output, format).as_bytes()).is_err() {
                return EXIT_INTERNAL;
            }
            if output.all_pass() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> Result<ScenarioConfig, ConfigError> {
        RawConfig::from_file_text(text)?.validate()
    }

    #[test]
    fn config_file_keys() {
        let c = raw("scenario = chain\nchain_length = 5  # five links\nsubstitute = 1,3\nsubstitute = (2,4)\norder = all\n")
            .unwrap();
        assert_eq!(c.chain_length, 5);
        assert_eq!(c.substitutions, [(1, 3), (2, 4)]);
        assert_eq!(c.order, Order::All);
        let c = raw("scenario = remark3\nremoved_links = [BF]").unwrap();
        assert_eq!(c.removed_links, [2]);
    }

    #[test]
    fn config_diagnostics_name_line_and_field() {
        let e = raw("scenario = chain\nchain_length = five").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(2), "chain_length"));
        let e = raw("scenario = chain\ncolour = red").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(raw("scenario = chain\nchain_length = 7\norder = all").is_err());
        assert!(raw("scenario = chain\nsubstitute = 1,2\nsubstitute = 2,3").is_err());
        assert!(raw("scenario = smolin\nmode = sampled").is_err());
        assert!(raw("scenario = remark3\nremove_link = 3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut r = RawConfig::from_file_text("scenario = chain\nchain_length = 5").unwrap();
        r.override_with(&Opts {
            chain_length: Some(4),
            ..Opts::default()
        })
        .unwrap();
        assert_eq!(r.validate().unwrap().chain_length, 4);
    }

    #[test]
    fn broken_chain_pieces_depolarize_across_the_gap() {
        let config = raw("scenario = chain\nchain_length = 4\nsubstitute = 1,3\nremove_link = 2").unwrap();
        let out = run_scenario(&config).unwrap();
        assert!(out.all_pass(), "{}", emit_text(&out));
        assert!(out.claims.iter().any(|c| c.id == "depolarized-A-E"));
    }

    #[test]
    fn permutations_are_complete() {
        let items: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut p = permutations(&items);
        assert_eq!(p.len(), 6);
        p.dedup();
        assert_eq!(p.len(), 6);
    }
}
