//! Literal grammars, JSON shapes and the persisted run configuration.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{
    self, coin_c, merge_split_h, quantum_merge_split_hq, step_m, toggle_tau, Mirror,
};
use crate::error::{QnetError, Result};
use crate::graphs::{Graph, NameShape, State, System, Universe, UniverseSpec};
use crate::hilbert::{OperatorMatrix, StateVector};
use crate::names::{normalize, Dir, Key, Name, Suffix, Term};
use crate::restrict::{Predicate, Restriction};
use crate::tensor_trace::Operator;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const PRECONDITION: i32 = 4;
}

pub fn exit_code(e: &QnetError) -> i32 {
    match e {
        QnetError::Parse { .. }
        | QnetError::Usage(_)
        | QnetError::Io(_)
        | QnetError::InvalidRenaming(_) => exit::USAGE,
        QnetError::WellNamednessViolation { .. } => exit::USAGE,
        QnetError::PreconditionFailed { .. }
        | QnetError::SupportEscape { .. }
        | QnetError::NotUnitary { .. }
        | QnetError::UniverseMismatch(_)
        | QnetError::UniverseTooLarge { .. } => exit::PRECONDITION,
        QnetError::Internal(_) | QnetError::NormDrift { .. } => exit::FAIL,
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Cursor<'a> {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let t = self.rest();
        self.pos += t.len() - t.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn error(&mut self, expected: &[&str]) -> QnetError {
        self.skip_ws();
        let found = match self.rest().chars().next() {
            Some(c) => format!("'{c}'"),
            None => "end of input".into(),
        };
        QnetError::Parse {
            pos: self.pos,
            msg: format!(
                "line 1, column {}: expected one of {{{}}}, found {found}",
                self.pos + 1,
                expected.join(", ")
            ),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[&format!("'{c}'")]))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        let t = self.rest();
        let boundary = t[w.len().min(t.len())..]
            .chars()
            .next()
            .is_none_or(|c| !c.is_ascii_alphanumeric() && c != '_');
        if t.starts_with(w) && boundary {
            self.pos += w.len();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let t = self.rest();
        let n = t.find(|c| !f(c)).unwrap_or(t.len());
        self.pos += n;
        &t[..n]
    }

    fn ident(&mut self, what: &str) -> Result<&'a str> {
        let s = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if s.is_empty() {
            Err(self.error(&[what]))
        } else {
            Ok(s)
        }
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let start = self.pos;
        let s = self.take_while(|c| c.is_ascii_digit());
        s.parse().map_err(|_| {
            self.pos = start;
            self.error(&[what])
        })
    }

    fn finish(&mut self) -> Result<()> {
        if self.peek().is_some() {
            Err(self.error(&["end of input"]))
        } else {
            Ok(())
        }
    }
}

fn term(c: &mut Cursor) -> Result<Term> {
    let mut t = if c.eat('(') {
        let a = term(c)?;
        if !c.eat('|') {
            return Err(c.error(&["'|'", "'.'"]));
        }
        let b = term(c)?;
        c.expect(')')?;
        Term::Join(Box::new(a), Box::new(b))
    } else {
        let neg = c.eat('-');
        let start = c.pos;
        let id: u64 = c.number("key id")?;
        if id == 0 {
            c.pos = start;
            return Err(c.error(&["positive key id"]));
        }
        Term::Atom(Key { id, neg })
    };
    loop {
        let save = c.pos;
        if !c.eat('.') {
            break;
        }
        let word = c.take_while(|ch| ch == 'l' || ch == 'r');
        if word.is_empty() {
            c.pos = save;
            break;
        }
        let dirs: Vec<Dir> = word
            .chars()
            .map(|ch| if ch == 'l' { Dir::L } else { Dir::R })
            .collect();
        t = Term::Descend(Box::new(t), Suffix::from_dirs(&dirs));
    }
    Ok(t)
}

/// A raw name term, before normalization.
pub fn parse_term(text: &str) -> Result<Term> {
    let mut c = Cursor::new(text);
    let t = term(&mut c)?;
    c.finish()?;
    Ok(t)
}

pub fn parse_name(text: &str) -> Result<Name> {
    parse_term(text).map(|t| normalize(&t))
}

fn name(c: &mut Cursor) -> Result<Name> {
    term(c).map(|t| normalize(&t))
}

fn system(c: &mut Cursor) -> Result<System> {
    let state = c.ident("state")?;
    c.expect('.')?;
    Ok(System::new(state, name(c)?))
}

fn graph(c: &mut Cursor) -> Result<Graph> {
    c.expect('{')?;
    let mut systems = Vec::new();
    if !c.eat('}') {
        loop {
            systems.push(system(c)?);
            if c.eat('}') {
                break;
            }
            if !c.eat(',') {
                return Err(c.error(&["','", "'}'"]));
            }
        }
    }
    Graph::new(systems)
}

/// `{state.name, ...}`; fails on graphs that are not well-named.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut c = Cursor::new(text);
    let g = graph(&mut c)?;
    c.finish()?;
    Ok(g)
}

fn name_set(c: &mut Cursor) -> Result<Vec<Name>> {
    c.expect('{')?;
    let mut out = Vec::new();
    if c.eat('}') {
        return Ok(out);
    }
    loop {
        out.push(name(c)?);
        if c.eat('}') {
            return Ok(out);
        }
        c.expect(',')?;
    }
}

fn boolean(c: &mut Cursor) -> Result<bool> {
    if c.eat_word("true") {
        Ok(true)
    } else if c.eat_word("false") {
        Ok(false)
    } else {
        Err(c.error(&["true", "false"]))
    }
}

fn predicate(c: &mut Cursor) -> Result<Predicate> {
    if c.eat_word("not") {
        c.expect('(')?;
        let p = predicate(c)?;
        c.expect(')')?;
        return Ok(Predicate::Not(Box::new(p)));
    }
    if c.eat_word("outside") {
        c.expect('(')?;
        let r = restriction(c)?;
        c.expect(')')?;
        if !r.is_pointwise() {
            return Err(QnetError::Usage(format!(
                "outside({r}) needs a pointwise restriction"
            )));
        }
        return Ok(Predicate::Outside(Box::new(r)));
    }
    if c.eat_word("states") {
        c.expect('=')?;
        c.expect('{')?;
        let mut xs = Vec::new();
        if !c.eat('}') {
            loop {
                xs.push(State::new(c.ident("state")?));
                if c.eat('}') {
                    break;
                }
                c.expect(',')?;
            }
        }
        return Ok(Predicate::StateIn(xs));
    }
    if c.eat_word("state") {
        c.expect('=')?;
        return Ok(Predicate::StateIs(State::new(c.ident("state")?)));
    }
    if c.eat_word("bit") {
        c.expect('=')?;
        return match c.take_while(|ch| ch.is_ascii_digit()) {
            "0" => Ok(Predicate::Bit(false)),
            "1" => Ok(Predicate::Bit(true)),
            _ => Err(c.error(&["0", "1"])),
        };
    }
    if c.eat_word("vertex") {
        c.expect('=')?;
        return Ok(Predicate::VertexIs(name(c)?));
    }
    Err(c.error(&["state=", "states=", "bit=", "vertex=", "not(", "outside("]))
}

fn restriction(c: &mut Cursor) -> Result<Restriction> {
    const HEADS: [&str; 9] = [
        "full",
        "empty",
        "zeta",
        "disk",
        "pointwise",
        "namewise",
        "near",
        "union",
        "compose",
    ];
    if c.eat_word("full") {
        return Ok(Restriction::Full);
    }
    if c.eat_word("empty") {
        return Ok(Restriction::Empty);
    }
    if c.eat_word("zeta") {
        c.expect('(')?;
        if !c.eat_word("v") {
            return Err(c.error(&["v="]));
        }
        c.expect('=')?;
        let v = name(c)?;
        let mut overlap = false;
        if c.eat(',') {
            if !c.eat_word("mode") {
                return Err(c.error(&["mode="]));
            }
            c.expect('=')?;
            overlap = if c.eat_word("overlap") {
                true
            } else if c.eat_word("exact") {
                false
            } else {
                return Err(c.error(&["exact", "overlap"]));
            };
        }
        c.expect(')')?;
        return Ok(if overlap {
            Restriction::zeta_overlap(v)
        } else {
            Restriction::zeta(v)
        });
    }
    if c.eat_word("disk") {
        c.expect('(')?;
        let base = restriction(c)?;
        c.expect(',')?;
        if !c.eat_word("r") {
            return Err(c.error(&["r="]));
        }
        c.expect('=')?;
        let r: usize = c.number("radius")?;
        let mut oriented = false;
        if c.eat(',') {
            if !c.eat_word("oriented") {
                return Err(c.error(&["oriented="]));
            }
            c.expect('=')?;
            oriented = boolean(c)?;
        }
        c.expect(')')?;
        return Ok(Restriction::disk(base, r, oriented));
    }
    if c.eat_word("pointwise") {
        c.expect('(')?;
        let p = predicate(c)?;
        c.expect(')')?;
        return Ok(Restriction::Pointwise(p));
    }
    if c.eat_word("namewise") {
        c.expect('(')?;
        if !c.eat_word("S") {
            return Err(c.error(&["S="]));
        }
        c.expect('=')?;
        let s = name_set(c)?;
        c.expect(')')?;
        return Ok(Restriction::Namewise(s));
    }
    if c.eat_word("near") {
        c.expect('(')?;
        if !c.eat_word("v") {
            return Err(c.error(&["v="]));
        }
        c.expect('=')?;
        let v = name(c)?;
        c.expect(')')?;
        return Ok(dynamics::name_neighbourhood(&v));
    }
    for (word, union) in [("union", true), ("compose", false)] {
        if c.eat_word(word) {
            c.expect('(')?;
            let a = restriction(c)?;
            c.expect(',')?;
            let b = restriction(c)?;
            c.expect(')')?;
            return Ok(if union {
                Restriction::union(a, b)
            } else {
                Restriction::compose(a, b)
            });
        }
    }
    Err(c.error(&HEADS))
}

/// Restriction literals such as `disk(zeta(v=1),r=1,oriented=false)`.
/// `near(v=x)` is shorthand for the systems sharing a signed key with `x`.
pub fn parse_restriction(text: &str) -> Result<Restriction> {
    let mut c = Cursor::new(text);
    let r = restriction(&mut c)?;
    c.finish()?;
    Ok(r)
}

fn angle(c: &mut Cursor) -> Result<f64> {
    let neg = c.eat('-');
    let start = c.pos;
    let num = c.take_while(|ch| ch.is_ascii_digit() || ch == '.' || ch == 'e');
    let mut x = if num.is_empty() {
        1.0
    } else {
        num.parse::<f64>().map_err(|_| {
            c.pos = start;
            c.error(&["angle"])
        })?
    };
    let has_pi = c.eat_word("pi");
    if has_pi {
        x *= PI;
    } else if num.is_empty() {
        return Err(c.error(&["number", "pi"]));
    }
    if c.eat('/') {
        let d: f64 = c
            .take_while(|ch| ch.is_ascii_digit() || ch == '.')
            .parse()
            .map_err(|_| c.error(&["divisor"]))?;
        x /= d;
    }
    Ok(if neg { -x } else { x })
}

fn factor(c: &mut Cursor) -> Result<Operator> {
    let one_angle = |c: &mut Cursor| -> Result<f64> {
        c.expect('(')?;
        let a = angle(c)?;
        c.expect(')')?;
        Ok(a)
    };
    if c.eat_word("Hq") {
        return Ok(quantum_merge_split_hq(one_angle(c)?));
    }
    if c.eat_word("C") {
        return Ok(coin_c(one_angle(c)?));
    }
    if c.eat_word("tau") {
        c.expect('(')?;
        if !c.eat_word("v") {
            return Err(c.error(&["v="]));
        }
        c.expect('=')?;
        let v = name(c)?;
        c.expect(')')?;
        return Ok(toggle_tau(&v));
    }
    for (w, op) in [
        ("I", Operator::Identity),
        ("M", step_m()),
        ("H", merge_split_h()),
        ("P", Operator::basis(Mirror)),
    ] {
        if c.eat_word(w) {
            return Ok(op);
        }
    }
    if c.eat('(') {
        let inner = product(c)?;
        c.expect(')')?;
        return Ok(inner);
    }
    Err(c.error(&["I", "M", "P", "H", "C(", "Hq(", "tau(", "'('"]))
}

fn product(c: &mut Cursor) -> Result<Operator> {
    let mut ops = vec![factor(c)?];
    while c.eat('*') {
        ops.push(factor(c)?);
    }
    Ok(if ops.len() == 1 {
        ops.pop().expect("one factor")
    } else {
        Operator::Product(ops)
    })
}

/// Operator specs: `I`, `M`, `P`, `H`, `C(θ)`, `Hq(φ)`, `tau(v=x)` and
/// products `A*B` (rightmost factor acts first). Angles are numbers or
/// multiples of `pi`, optionally divided: `0.5`, `pi/5`, `-2pi/3`.
pub fn parse_operator(text: &str) -> Result<Operator> {
    let mut c = Cursor::new(text);
    let op = product(&mut c)?;
    c.finish()?;
    Ok(op)
}

/// A universe description. Either `chain=n[,states=movers|all]`, or
/// comma-separated `keys`, `depth`, `sigma`, `maxnodes`, `shape`, where a
/// bare count stands for `{1..n}` (keys) or `{0..n-1}` (states).
#[derive(Clone, Debug, PartialEq)]
pub enum UniverseRequest {
    Spec(UniverseSpec),
    Chain { n: usize, all_states: bool },
}

impl UniverseRequest {
    pub fn build(&self) -> Result<Universe> {
        match self {
            UniverseRequest::Spec(s) => Universe::from_spec(s),
            UniverseRequest::Chain { n, all_states } => {
                let states: &[&str] = if *all_states {
                    &dynamics::ALL_STATES
                } else {
                    &dynamics::MOVERS
                };
                dynamics::chain_universe(*n, states)
            }
        }
    }
}

fn list_or_count(c: &mut Cursor, what: &str) -> Result<Vec<String>> {
    if c.eat('{') {
        let mut xs = Vec::new();
        loop {
            xs.push(c.ident(what)?.to_string());
            if c.eat('}') {
                return Ok(xs);
            }
            c.expect(',')?;
        }
    }
    let n: usize = c.number(what)?;
    Ok((0..n).map(|i| i.to_string()).collect())
}

pub fn parse_universe(text: &str) -> Result<UniverseRequest> {
    let mut c = Cursor::new(text);
    if c.eat_word("chain") {
        c.expect('=')?;
        let n: usize = c.number("chain length")?;
        let mut all_states = false;
        if c.eat(',') {
            if !c.eat_word("states") {
                return Err(c.error(&["states="]));
            }
            c.expect('=')?;
            all_states = if c.eat_word("all") {
                true
            } else if c.eat_word("movers") {
                false
            } else {
                return Err(c.error(&["movers", "all"]));
            };
        }
        c.finish()?;
        if n == 0 {
            return Err(QnetError::Usage("chain length must be positive".into()));
        }
        return Ok(UniverseRequest::Chain { n, all_states });
    }
    let mut spec = UniverseSpec::default_small();
    if c.peek().is_none() {
        return Ok(UniverseRequest::Spec(spec));
    }
    loop {
        let field = c.ident("field")?;
        c.expect('=')?;
        match field {
            "keys" => {
                if c.peek() == Some('{') {
                    let ks = list_or_count(&mut c, "key id")?;
                    spec.keys = ks
                        .iter()
                        .map(|k| k.parse::<u64>().ok().filter(|&k| k > 0))
                        .collect::<Option<Vec<u64>>>()
                        .ok_or_else(|| QnetError::Usage(format!("bad key list {ks:?}")))?;
                } else {
                    let n: u64 = c.number("key count")?;
                    spec.keys = (1..=n).collect();
                }
            }
            "depth" => spec.depth = c.number("depth")?,
            "sigma" => {
                spec.sigma = list_or_count(&mut c, "state")?
                    .into_iter()
                    .map(State::new)
                    .collect()
            }
            "maxnodes" => {
                spec.max_systems = if c.eat_word("all") {
                    None
                } else {
                    Some(c.number("node count")?)
                };
            }
            "shape" => {
                spec.shape = if c.eat_word("leaves") {
                    NameShape::LeavesOnly
                } else if c.eat_word("joins") {
                    NameShape::JoinsAllowed
                } else if c.eat_word("chain") {
                    NameShape::ChainNamed
                } else {
                    return Err(c.error(&["leaves", "joins", "chain"]));
                };
            }
            _ => {
                c.pos -= field.len() + 1;
                return Err(c.error(&["keys", "depth", "sigma", "maxnodes", "shape"]));
            }
        }
        if !c.eat(',') {
            break;
        }
    }
    c.finish()?;
    Ok(UniverseRequest::Spec(spec))
}

pub fn state_vector_json(psi: &StateVector) -> Value {
    let terms: Vec<Value> = psi
        .sorted_terms()
        .into_iter()
        .map(|(g, a)| json!({"re": a.re, "im": a.im, "graph": g.to_string()}))
        .collect();
    json!({ "terms": terms })
}

pub fn operator_matrix_json(m: &OperatorMatrix) -> Value {
    let entries: Vec<Value> = m
        .entries()
        .into_iter()
        .map(
            |(k, b, a)| json!({"ket": k.to_string(), "bra": b.to_string(), "re": a.re, "im": a.im}),
        )
        .collect();
    json!({ "entries": entries })
}

pub fn state_vector_from_json(v: &Value) -> Result<StateVector> {
    let bad = || {
        QnetError::Usage("state vector JSON needs {\"terms\":[{\"re\",\"im\",\"graph\"}]}".into())
    };
    let terms = v.get("terms").and_then(Value::as_array).ok_or_else(bad)?;
    let mut psi = StateVector::zero();
    for t in terms {
        let g = parse_graph(t.get("graph").and_then(Value::as_str).ok_or_else(bad)?)?;
        let re = t.get("re").and_then(Value::as_f64).ok_or_else(bad)?;
        let im = t.get("im").and_then(Value::as_f64).unwrap_or(0.0);
        psi.add_term(g, crate::hilbert::c(re, im));
    }
    Ok(psi)
}

/// Everything a command needs to replay a run.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub universe: Option<String>,
    pub zeta: Option<String>,
    pub chi: Option<String>,
    pub op: Option<String>,
    pub laws: Vec<String>,
    pub seed: u64,
    pub np_only: bool,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub output: Option<String>,
    pub timing: bool,
    pub init: Option<String>,
    pub steps: Option<usize>,
    pub chain: Option<usize>,
    pub ancilla: Option<bool>,
    pub cause: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| QnetError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| QnetError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(
            path,
            &serde_json::to_value(self).expect("config serializes"),
        )
    }

    /// `QNET_SEED` wins over the configured seed.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(s) = std::env::var("QNET_SEED") {
            self.seed = s
                .trim()
                .parse()
                .map_err(|_| QnetError::Usage(format!("QNET_SEED={s} is not an integer")))?;
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline, written through a temporary file
/// and a rename.
pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let io = |e: std::io::Error| QnetError::Io(format!("{}: {e}", path.display()));
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(to_pretty(v).as_bytes()).map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}
