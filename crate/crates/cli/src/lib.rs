//! Command implementations behind the `glp` binary. Each command returns
//! its rendered output and an exit code so that tests can drive them
//! without spawning processes.

use std::collections::{BTreeMap, BTreeSet};

use glp_core::embed::{self, Check, Countermodel, Mode, Report};
use glp_core::jtree::{find_jtree_model, FrameRepr, JFrame};
use glp_core::logic::{condense, eval_kripke, eval_topo, parse, BandValuation, Formula, NodeValuation, PolySpace};
use glp_core::ordinal::{self as ord, Ordinal};
use glp_core::topology::{derived_iter, is_open, parse_bandset, rank, BandSet, Domain, LevelSpec};
use serde::{Deserialize, Serialize};

/// Exit code for success or a verified claim.
pub const EXIT_OK: i32 = 0;
/// Exit code for a failed verification.
pub const EXIT_FAIL: i32 = 1;
/// Exit code when a search gives up.
pub const EXIT_UNKNOWN: i32 = 2;

/// Errors surfaced to the user.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed ordinal expression.
    #[error("syntax error at {pos}: {msg}")]
    Syntax {
        /// Byte offset.
        pos: usize,
        /// Description.
        msg: String,
    },
    /// Ordinal arithmetic failure.
    #[error(transparent)]
    Ordinal(#[from] ord::OrdinalError),
    /// Set algebra failure.
    #[error(transparent)]
    Topology(#[from] glp_core::topology::TopologyError),
    /// Formula failure.
    #[error(transparent)]
    Logic(#[from] glp_core::logic::LogicError),
    /// Frame failure.
    #[error(transparent)]
    Frame(#[from] glp_core::jtree::FrameError),
    /// Countermodel failure.
    #[error(transparent)]
    Embed(#[from] glp_core::embed::EmbedError),
    /// File or JSON failure.
    #[error("{0}")]
    Io(String),
    /// Bad arguments.
    #[error("{0}")]
    Usage(String),
}

type Res<T> = Result<T, CliError>;

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Random seed.
    pub seed: u64,
    /// Sample and search budget.
    pub budget: usize,
    /// Emit JSON instead of text.
    pub json: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            budget: 200,
            json: false,
        }
    }
}

/// Rendered output plus exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    /// Text for stdout.
    pub text: String,
    /// Process exit code.
    pub code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: EXIT_OK }
    }
}

fn to_json<T: Serialize>(v: &T) -> Res<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))
}

/// Reads a JSON file.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

/// Writes a JSON file.
pub fn write_json<T: Serialize>(path: &str, v: &T) -> Res<()> {
    std::fs::write(path, to_json(v)? + "\n").map_err(|e| CliError::Io(format!("{path}: {e}")))
}

/// Parses `1,2,3`.
pub fn parse_levels(s: &str) -> Res<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("bad level list: {s}"))))
        .collect()
}

struct Expr<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Expr<'_> {
    fn err<T>(&self, msg: &str) -> Res<T> {
        Err(CliError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&mut self) -> Option<u8> {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Res<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn sum(&mut self) -> Res<Ordinal> {
        let mut acc = self.product()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            acc = acc.add(&self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Res<Ordinal> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.multiply(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Res<Ordinal> {
        let (base, is_w) = self.atom()?;
        if self.peek() == Some(b'^') {
            if !is_w {
                return self.err("only w may be raised to a power");
            }
            self.pos += 1;
            return Ok(ord::omega_pow(&self.power()?)?);
        }
        Ok(base)
    }

    fn nat(&mut self, a: &Ordinal) -> Res<u64> {
        match a.to_u64() {
            Some(n) => Ok(n),
            None => self.err("expected a natural number"),
        }
    }

    fn atom(&mut self) -> Res<(Ordinal, bool)> {
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err("unexpected end of input"),
        };
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let n = num_bigint::BigUint::parse_bytes(s.as_bytes(), 10).expect("digits");
            return Ok((Ordinal::nat(n), false));
        }
        if c == b'(' {
            self.pos += 1;
            let v = self.sum()?;
            self.eat(b')')?;
            return Ok((v, false));
        }
        if !c.is_ascii_alphabetic() {
            return self.err("expected ordinal");
        }
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_alphanumeric) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii").to_string();
        if name == "w" {
            return Ok((Ordinal::omega(), true));
        }
        self.eat(b'(')?;
        let mut args = vec![self.sum()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            args.push(self.sum()?);
        }
        self.eat(b')')?;
        let arity = |n: usize| -> Res<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(CliError::Syntax {
                    pos: start,
                    msg: format!("{name} takes {n} argument(s)"),
                })
            }
        };
        let v = match name.as_str() {
            "e" => {
                arity(1)?;
                ord::e(&args[0])?
            }
            "l" => {
                arity(1)?;
                ord::ell(&args[0])?
            }
            "L" => {
                arity(1)?;
                ord::big_l(&args[0])?
            }
            "pounds" => {
                arity(1)?;
                ord::pounds(&args[0])
            }
            "eiter" => {
                arity(2)?;
                let n = self.nat(&args[0])?;
                ord::e_iter(n, &args[1])?
            }
            "liter" => {
                arity(2)?;
                ord::ell_iter(&args[0], &args[1])
            }
            "sub" => {
                arity(2)?;
                args[0].left_subtract(&args[1])?
            }
            _ => {
                self.pos = start;
                return self.err(&format!("unknown function {name}"));
            }
        };
        Ok((v, false))
    }
}

/// Evaluates an ordinal expression with `+`, `*`, `w^`, and the functions
/// `e`, `l`, `L`, `pounds`, `eiter(n,x)`, `liter(n,x)`, `sub(a,b)`.
pub fn eval_ordinal(src: &str) -> Res<Ordinal> {
    let mut p = Expr { src: src.as_bytes(), pos: 0 };
    let v = p.sum()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// `glp ord`.
pub fn cmd_ord(expr: &str, cfg: &Config) -> Res<Output> {
    let v = eval_ordinal(expr)?;
    Ok(Output::ok(if cfg.json { to_json(&v)? } else { v.to_string() }))
}

#[derive(Serialize)]
struct BandReport {
    set: BandSet,
    empty: bool,
    min: Option<Ordinal>,
    derived: BandSet,
    open: bool,
    member: Option<bool>,
    rank: Option<Ordinal>,
}

/// `glp band`: normalises a band set inside `[1, theta]` and reports its
/// least element, its `iter`-fold derived set at `level` and openness.
pub fn cmd_band(src: &str, theta: &str, level: u64, iter: u64, point: Option<&str>, cfg: &Config) -> Res<Output> {
    let theta = ord::parse(theta)?;
    let domain = Domain::upto(theta);
    let set = parse_bandset(src)?.intersect(&domain.to_bandset());
    let lvl = LevelSpec::new(level);
    let derived = derived_iter(&set, &lvl, &Ordinal::from_u64(iter), &domain)?;
    let x = point.map(ord::parse).transpose()?;
    let r = BandReport {
        empty: set.is_empty(),
        min: set.min_witness(),
        open: is_open(&set, &lvl, &domain)?,
        member: x.as_ref().map(|x| set.member(x)),
        rank: x.as_ref().map(|x| rank(x, &lvl)),
        derived,
        set,
    };
    if cfg.json {
        return Ok(Output::ok(to_json(&r)?));
    }
    let mut t = format!("set      {}\nempty    {}\n", r.set, r.empty);
    if let Some(m) = &r.min {
        t += &format!("min      {m}\n");
    }
    t += &format!("d^{iter}      {}\nopen     {}\n", r.derived, r.open);
    if let (Some(m), Some(k)) = (r.member, &r.rank) {
        t += &format!("member   {m}\nrank     {k}\n");
    }
    Ok(Output::ok(t.trim_end().to_string()))
}

/// Reads a band valuation: a JSON object from variable index to band text.
pub fn read_band_valuation(path: &str) -> Res<BandValuation> {
    let raw: BTreeMap<String, String> = read_json(path)?;
    raw.into_iter()
        .map(|(k, v)| {
            let i = k.trim_start_matches('p').parse::<u32>().map_err(|_| CliError::Usage(format!("bad variable {k}")))?;
            Ok((i, parse_bandset(&v)?))
        })
        .collect()
}

/// Reads a node valuation: a JSON object from variable index to node list.
pub fn read_node_valuation(path: &str) -> Res<NodeValuation> {
    let raw: BTreeMap<String, BTreeSet<usize>> = read_json(path)?;
    raw.into_iter()
        .map(|(k, v)| {
            let i = k.trim_start_matches('p').parse::<u32>().map_err(|_| CliError::Usage(format!("bad variable {k}")))?;
            Ok((i, v))
        })
        .collect()
}

#[derive(Serialize)]
struct EvalReport {
    set: BandSet,
    empty: bool,
    theta_in: bool,
}

/// `glp eval`: the extension of a formula on `[1, theta]` with the given
/// Icard levels; unlisted variables are empty.
pub fn cmd_eval(formula: &str, theta: &str, levels: &[u64], val: &BandValuation, cfg: &Config) -> Res<Output> {
    let phi = parse(formula)?;
    let space = PolySpace::new(ord::parse(theta)?, levels);
    let mut v = val.clone();
    for p in phi.vars() {
        v.entry(p).or_insert_with(BandSet::empty);
    }
    let set = eval_topo(&phi, &space, &v)?;
    let r = EvalReport {
        empty: set.is_empty(),
        theta_in: set.member(&space.theta),
        set,
    };
    if cfg.json {
        return Ok(Output::ok(to_json(&r)?));
    }
    let shown = if r.empty { "∅".to_string() } else { r.set.to_string() };
    Ok(Output::ok(format!(
        "{shown}\n{}\ntheta {}",
        if r.empty { "empty" } else { "nonempty" },
        if r.theta_in { "in" } else { "not in" }
    )))
}

/// `glp kripke`: nodes of a frame satisfying a formula.
pub fn cmd_kripke(formula: &str, frame: &JFrame, val: &NodeValuation, cfg: &Config) -> Res<Output> {
    let phi = parse(formula)?;
    let sat = eval_kripke(&phi, frame, val)?;
    let nodes: Vec<usize> = (0..frame.len()).filter(|&x| sat[x]).collect();
    if cfg.json {
        return Ok(Output::ok(to_json(&nodes)?));
    }
    let v: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
    Ok(Output::ok(format!("{{{}}}", v.join(", "))))
}

/// `glp embed`.
pub fn cmd_embed(frame: &JFrame, sigma: &[u64]) -> Res<Countermodel> {
    Ok(embed::embed(frame, sigma)?)
}

/// Summary line for a countermodel.
pub fn describe(cm: &Countermodel) -> String {
    let mut t = format!("theta    {}\nsigma    {:?}\n", cm.theta, cm.sigma);
    for (k, w) in cm.witnesses.iter().enumerate() {
        t += &format!("node {k}   witness {w}\n");
    }
    for (name, f) in &cm.algebra {
        t += &format!("{name:<9}{f}\n");
    }
    t.trim_end().to_string()
}

/// Condenses `phi` for a countermodel: the modality indices become `0..k`
/// and must fit the tree's relations.
pub fn condensed_for(cm: &Countermodel, phi: &Formula) -> Res<Formula> {
    let (c, idx) = condense(phi);
    if idx.len() > cm.tree.rels() {
        return Err(CliError::Usage(format!(
            "formula uses {} modalities but the tree has {} relations",
            idx.len(),
            cm.tree.rels()
        )));
    }
    Ok(c)
}

fn render_report(r: &Report) -> String {
    let line = |c: &Check| {
        format!(
            "{} [{}] {}{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.mode,
            c.name,
            if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) }
        )
    };
    r.checks.iter().map(line).collect::<Vec<_>>().join("\n")
}

/// `glp verify`.
pub fn cmd_verify(cm: &Countermodel, formula: &str, cfg: &Config) -> Res<Output> {
    let phi = condensed_for(cm, &parse(formula)?)?;
    let r = embed::verify_countermodel(cm, &phi, cfg.budget)?;
    let code = if r.passed() { EXIT_OK } else { EXIT_FAIL };
    let text = if cfg.json { to_json(&r)? } else { render_report(&r) };
    Ok(Output { text, code })
}

/// Result of `glp search`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    /// The J-tree.
    pub frame: JFrame,
    /// Valuation making the formula true at the root.
    pub valuation: NodeValuation,
    /// Original modality indices, one per relation.
    pub indices: Vec<Ordinal>,
}

/// Searches for a J-tree model of the condensed formula.
pub fn search(formula: &Formula, max_nodes: usize, cfg: &Config) -> Option<SearchResult> {
    let (c, idx) = condense(formula);
    let m = find_jtree_model(&c, max_nodes, cfg.budget.max(1) * 10, cfg.seed)?;
    Some(SearchResult {
        frame: m.frame,
        valuation: m.valuation,
        indices: idx,
    })
}

/// `glp search`.
pub fn cmd_search(formula: &str, max_nodes: usize, cfg: &Config) -> Res<(Output, Option<SearchResult>)> {
    let phi = parse(formula)?;
    match search(&phi, max_nodes, cfg) {
        None => {
            let text = if cfg.json { "null".to_string() } else { "unknown".to_string() };
            Ok((Output { text, code: EXIT_UNKNOWN }, None))
        }
        Some(r) => {
            let text = if cfg.json {
                to_json(&r)?
            } else {
                let repr = FrameRepr::from(r.frame.clone());
                format!(
                    "nodes    {}\nrels     {:?}\nval      {:?}",
                    repr.nodes, repr.rels, r.valuation
                )
            };
            Ok((Output::ok(text), Some(r)))
        }
    }
}

/// Levels for a searched model: relation `k` is read at level `k + 1`.
pub fn default_sigma(frame: &JFrame) -> Vec<u64> {
    (1..=frame.rels() as u64).collect()
}

/// Whole pipeline: search, embed, verify.
pub fn refute_pipeline(formula: &str, max_nodes: usize, cfg: &Config) -> Res<Option<(Countermodel, Report)>> {
    let phi = parse(formula)?;
    let Some(found) = search(&phi, max_nodes, cfg) else {
        return Ok(None);
    };
    let mut cm = embed::embed(&found.frame, &default_sigma(&found.frame))?;
    cm.valuation = Some(found.valuation);
    let c = condensed_for(&cm, &phi)?;
    let r = embed::verify_countermodel(&cm, &c, cfg.budget)?;
    Ok(Some((cm, r)))
}

/// True if every check of `r` was decided exactly.
pub fn all_exact(r: &Report) -> bool {
    r.checks.iter().all(|c| c.mode == Mode::Exact)
}

/// Checks that `fmap⁻¹(root) = {theta}` symbolically when possible.
pub fn root_fibre_is_top(cm: &Countermodel) -> Res<bool> {
    let r = glp_core::jtree::root(&cm.tree).ok_or_else(|| CliError::Usage("tree has no root".into()))?;
    let f = cm.fmap.node_preimage(r);
    let dom = embed::Fibre::Band(BandSet::interval(Ordinal::one(), cm.theta.clone()));
    let f = f.intersect(&dom);
    Ok(match f.to_band() {
        Some(b) => b.set_eq(&BandSet::point(cm.theta.clone())),
        None => cm.fmap.node_at(&cm.theta)? == r,
    })
}
