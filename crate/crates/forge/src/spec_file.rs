//! JSON combinator files and registry shorthands for sets, functions,
//! permutations and descriptions.
//!
//! A spec is either a shorthand string such as `"evens"` or `"ruler:3"`, or
//! an object
//!
//! ```json
//! {"kind": "set", "combinator": "periodic", "args": [4, [0, 1]], "delays": {"5": 100}}
//! ```
//!
//! `kind` is one of `set`, `func`, `perm`, `description` and may be omitted
//! where the position already fixes it. `args` entries are numbers, arrays,
//! `null`, or nested specs. `delays` maps points to extra step costs or to
//! `"never"`. Errors carry a JSON path such as `$.args[1].args[0]`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use density_forge_core::coding::{factorial_code, oscillator, power_code, ruler_collapse, ruler_set};
use density_forge_core::describe::{combine_total, Answer, DescExpr, Description, Mode};
use density_forge_core::set_calculus::{
    complement, intersection, join, union, FuncExpr, FuncSpec, Mapping, PermSpec, SetExpr, SetSpec,
};
use density_forge_core::{Delay, Nat};
use serde_json::Value;

/// A malformed spec, located by its JSON path.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct SpecError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{file}: {source}")]
    Io { file: String, source: std::io::Error },
    #[error("{file}: line {line}, column {column}: {message}")]
    Json { file: String, line: usize, column: usize, message: String },
    #[error("{file}: {source}")]
    Spec { file: String, source: SpecError },
}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError { path: path.to_string(), message: message.into() })
}

/// Read a JSON file, keeping line and column of syntax errors.
pub fn read_json(file: &Path) -> Result<Value, LoadError> {
    let name = file.display().to_string();
    let text = std::fs::read_to_string(file).map_err(|source| LoadError::Io { file: name.clone(), source })?;
    serde_json::from_str(&text).map_err(|e| LoadError::Json {
        file: name,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// A command-line argument: inline JSON if it starts with `[` or `{`, a path
/// to a JSON file if one exists there or it ends in `.json`, otherwise a
/// shorthand.
pub fn argument_value(arg: &str) -> Result<(Value, String), LoadError> {
    let path = Path::new(arg);
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let file = "<argument>".to_string();
        let v = serde_json::from_str(arg).map_err(|e| LoadError::Json {
            file: file.clone(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok((v, file))
    } else if arg.ends_with(".json") || path.is_file() {
        Ok((read_json(path)?, arg.to_string()))
    } else {
        Ok((Value::String(arg.to_string()), "<argument>".to_string()))
    }
}

fn with_file<T>(file: &str, r: Result<T, SpecError>) -> Result<T, LoadError> {
    r.map_err(|source| LoadError::Spec { file: file.to_string(), source })
}

pub fn load_set(arg: &str) -> Result<(SetSpec, Value), LoadError> {
    let (v, file) = argument_value(arg)?;
    let set = with_file(&file, parse_set(&v, "$"))?;
    Ok((set, v))
}

pub fn load_func(arg: &str) -> Result<FuncSpec, LoadError> {
    let (v, file) = argument_value(arg)?;
    with_file(&file, parse_func(&v, "$"))
}

pub fn load_perm(arg: &str) -> Result<PermSpec, LoadError> {
    let (v, file) = argument_value(arg)?;
    with_file(&file, parse_perm(&v, "$"))
}

pub fn load_description(arg: &str) -> Result<Description, LoadError> {
    let (v, file) = argument_value(arg)?;
    with_file(&file, parse_description(&v, "$"))
}

/// A single spec or an array of specs.
fn list(v: &Value) -> Vec<(&Value, String)> {
    match v {
        Value::Array(items) => items.iter().enumerate().map(|(i, x)| (x, format!("$[{i}]"))).collect(),
        other => vec![(other, "$".to_string())],
    }
}

pub fn load_set_list(arg: &str) -> Result<Vec<SetSpec>, LoadError> {
    let (v, file) = argument_value(arg)?;
    if let Value::String(s) = &v {
        if let Some(k) = s.strip_prefix("rulers:") {
            let k: Nat = with_file(&file, k.parse().or_else(|_| err("$", "rulers:K needs a number")))?;
            return Ok((0..k).map(ruler_set).collect());
        }
    }
    list(&v).into_iter().map(|(x, p)| with_file(&file, parse_set(x, &p))).collect()
}

pub fn load_mapping_list(arg: &str) -> Result<Vec<Mapping>, LoadError> {
    let (v, file) = argument_value(arg)?;
    list(&v).into_iter().map(|(x, p)| with_file(&file, parse_mapping(x, &p))).collect()
}

pub fn load_func_list(arg: &str) -> Result<Vec<FuncSpec>, LoadError> {
    let (v, file) = argument_value(arg)?;
    list(&v).into_iter().map(|(x, p)| with_file(&file, parse_func(x, &p))).collect()
}

/// The parts of a spec object, or a shorthand split on `:`.
struct Node<'a> {
    path: &'a str,
    combinator: String,
    args: Vec<Value>,
    delays: BTreeMap<Nat, Delay>,
    name: Option<String>,
    mode: Option<String>,
}

impl<'a> Node<'a> {
    fn read(v: &Value, path: &'a str, kind: &str) -> Result<Self, SpecError> {
        match v {
            Value::String(s) => {
                let mut parts = s.split(':');
                let combinator = normalize(parts.next().unwrap_or_default());
                let args = parts
                    .map(|p| p.parse::<Nat>().map(Value::from).unwrap_or_else(|_| Value::String(p.to_string())))
                    .collect();
                Ok(Node { path, combinator, args, delays: BTreeMap::new(), name: Some(s.clone()), mode: None })
            }
            Value::Object(map) => {
                for key in map.keys() {
                    if !["kind", "combinator", "args", "delays", "name", "mode"].contains(&key.as_str()) {
                        return err(path, format!("unknown field {key:?}"));
                    }
                }
                if let Some(k) = map.get("kind") {
                    match k.as_str() {
                        Some(k) if normalize(k) == kind => {}
                        Some(k) => return err(&format!("{path}.kind"), format!("expected {kind:?}, found {k:?}")),
                        None => return err(&format!("{path}.kind"), "expected a string"),
                    }
                }
                let combinator = match map.get("combinator") {
                    Some(Value::String(c)) => normalize(c),
                    Some(_) => return err(&format!("{path}.combinator"), "expected a string"),
                    None => return err(path, "missing field \"combinator\""),
                };
                let args = match map.get("args") {
                    None => Vec::new(),
                    Some(Value::Array(a)) => a.clone(),
                    Some(_) => return err(&format!("{path}.args"), "expected an array"),
                };
                let delays = match map.get("delays") {
                    None => BTreeMap::new(),
                    Some(d) => parse_delays(d, &format!("{path}.delays"))?,
                };
                let text = |key: &str| -> Result<Option<String>, SpecError> {
                    match map.get(key) {
                        None => Ok(None),
                        Some(Value::String(s)) => Ok(Some(s.clone())),
                        Some(_) => err(&format!("{path}.{key}"), "expected a string"),
                    }
                };
                Ok(Node { path, combinator, args, delays, name: text("name")?, mode: text("mode")? })
            }
            _ => err(path, format!("expected a {kind} spec (object or shorthand string)")),
        }
    }

    fn arg_path(&self, i: usize) -> String {
        format!("{}.args[{i}]", self.path)
    }

    fn arg(&self, i: usize) -> Result<(&Value, String), SpecError> {
        match self.args.get(i) {
            Some(v) => Ok((v, self.arg_path(i))),
            None => err(self.path, format!("{} needs at least {} argument(s)", self.combinator, i + 1)),
        }
    }

    fn nat(&self, i: usize) -> Result<Nat, SpecError> {
        let (v, p) = self.arg(i)?;
        nat(v, &p)
    }

    fn nat_or(&self, i: usize, default: Nat) -> Result<Nat, SpecError> {
        if i < self.args.len() {
            self.nat(i)
        } else {
            Ok(default)
        }
    }

    fn nats(&self, i: usize) -> Result<Vec<Nat>, SpecError> {
        let (v, p) = self.arg(i)?;
        match v {
            Value::Array(items) => items.iter().enumerate().map(|(j, x)| nat(x, &format!("{p}[{j}]"))).collect(),
            _ => err(&p, "expected an array of naturals"),
        }
    }

    fn set(&self, i: usize) -> Result<SetSpec, SpecError> {
        let (v, p) = self.arg(i)?;
        parse_set(v, &p)
    }

    fn func(&self, i: usize) -> Result<FuncSpec, SpecError> {
        let (v, p) = self.arg(i)?;
        parse_func(v, &p)
    }

    fn perm(&self, i: usize) -> Result<PermSpec, SpecError> {
        let (v, p) = self.arg(i)?;
        parse_perm(v, &p)
    }

    fn desc(&self, i: usize) -> Result<Description, SpecError> {
        let (v, p) = self.arg(i)?;
        parse_description(v, &p)
    }

    fn arity(&self, n: usize) -> Result<(), SpecError> {
        if self.args.len() > n {
            return err(&self.arg_path(n), format!("{} takes {n} argument(s)", self.combinator));
        }
        Ok(())
    }

    fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.combinator.clone())
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace('-', "_")
}

fn nat(v: &Value, path: &str) -> Result<Nat, SpecError> {
    match v.as_u64() {
        Some(n) => Ok(n),
        None => err(path, format!("expected a natural number, found {v}")),
    }
}

fn parse_delays(v: &Value, path: &str) -> Result<BTreeMap<Nat, Delay>, SpecError> {
    let Value::Object(map) = v else { return err(path, "expected an object from points to step counts") };
    map.iter()
        .map(|(k, d)| {
            let at = format!("{path}.{k}");
            let n: Nat = k.parse().or_else(|_| err(&at, "delay keys must be naturals"))?;
            let delay = match d {
                Value::String(s) if s == "never" => Delay::Never,
                _ => Delay::Steps(nat(d, &at)?),
            };
            Ok((n, delay))
        })
        .collect()
}

pub fn parse_set(v: &Value, path: &str) -> Result<SetSpec, SpecError> {
    let node = Node::read(v, path, "set")?;
    let name = node.name();
    let plain = |expr: SetExpr| SetSpec::new(name.clone(), expr);
    let set = match node.combinator.as_str() {
        "empty" => SetSpec::empty(),
        "omega" | "all" => SetSpec::omega(),
        "evens" => SetSpec::evens(),
        "odds" => SetSpec::odds(),
        "factorials" => plain(SetExpr::Factorials { from: node.nat_or(0, 2)? }),
        "non_factorials" => SetSpec::non_factorials(),
        "periodic" => {
            let modulus = node.nat(0)?;
            if modulus == 0 {
                return err(&node.arg_path(0), "modulus must be positive");
            }
            plain(SetExpr::periodic(modulus, node.nats(1)?))
        }
        "interval" => {
            let start = node.nat(0)?;
            let end = match node.args.get(1) {
                None | Some(Value::Null) => None,
                Some(e) => Some(nat(e, &node.arg_path(1))?),
            };
            plain(SetExpr::Interval { start, end })
        }
        "finite" => {
            node.arity(1)?;
            SetSpec::finite(node.nats(0)?)
        }
        "powers" => {
            let base = node.nat(0)?;
            if base < 2 {
                return err(&node.arg_path(0), "base must be at least 2");
            }
            plain(SetExpr::Powers { base, from: node.nat_or(1, 0)? })
        }
        "ruler" => ruler_set(node.nat(0)?),
        "random" => {
            let (seed, num, den) = (node.nat(0)?, node.nat(1)?, node.nat(2)?);
            if den == 0 || num > den {
                return err(node.path, "random needs 0 <= numerator <= denominator and denominator > 0");
            }
            SetSpec::random(seed, num, den)
        }
        "union" | "intersection" => {
            if node.args.len() < 2 {
                return err(node.path, format!("{} needs at least 2 arguments", node.combinator));
            }
            let mut acc = node.set(0)?;
            for i in 1..node.args.len() {
                let next = node.set(i)?;
                acc = if node.combinator == "union" { union(&acc, &next) } else { intersection(&acc, &next) };
            }
            acc
        }
        "complement" => {
            node.arity(1)?;
            complement(&node.set(0)?)
        }
        "join" => {
            node.arity(2)?;
            join(&node.set(0)?, &node.set(1)?)
        }
        "preimage" => {
            node.arity(2)?;
            let (f, s) = (node.func(0)?, node.set(1)?);
            SetSpec::new(name.clone(), SetExpr::preimage(f.expr().clone(), s.expr().clone())).with_kind(s.kind())
        }
        "image" => {
            node.arity(2)?;
            node.perm(0)?.image(&node.set(1)?)
        }
        "factorial_code" => {
            node.arity(1)?;
            factorial_code(&node.set(0)?).0
        }
        "oscillator" => {
            node.arity(1)?;
            oscillator(&node.set(0)?)
        }
        "enumerable" => {
            node.arity(1)?;
            let s = node.set(0)?;
            SetSpec::new(name.clone(), SetExpr::Enumerable(Arc::new(s.expr().clone())))
        }
        "window" => {
            node.arity(2)?;
            let s = node.set(0)?;
            SetSpec::new(name.clone(), SetExpr::Window { inner: Arc::new(s.expr().clone()), below: node.nat(1)? })
                .with_kind(s.kind())
        }
        "patch" => {
            node.arity(2)?;
            let s = node.set(0)?;
            let (v, p) = node.arg(1)?;
            let Value::Array(items) = v else { return err(&p, "expected an array of [point, bool] pairs") };
            let mut points = BTreeMap::new();
            for (j, item) in items.iter().enumerate() {
                let at = format!("{p}[{j}]");
                match item.as_array().map(Vec::as_slice) {
                    Some([n, Value::Bool(b)]) => {
                        points.insert(nat(n, &format!("{at}[0]"))?, *b);
                    }
                    _ => return err(&at, "expected [point, true|false]"),
                }
            }
            SetSpec::new(name.clone(), SetExpr::Patch { base: Arc::new(s.expr().clone()), points }).with_kind(s.kind())
        }
        other => return err(path, format!("unknown set combinator {other:?}")),
    };
    let set = if node.name.is_some() { set.renamed(name) } else { set };
    Ok(if node.delays.is_empty() {
        set
    } else {
        let kind = set.kind();
        SetSpec::new(set.name().to_string(), SetExpr::delayed(set.expr().clone(), node.delays)).with_kind(kind)
    })
}

pub fn parse_func(v: &Value, path: &str) -> Result<FuncSpec, SpecError> {
    let node = Node::read(v, path, "func")?;
    let name = node.name();
    let expr = match node.combinator.as_str() {
        "identity" => FuncExpr::Identity,
        "constant" => FuncExpr::Constant(node.nat(0)?),
        "affine" => FuncExpr::Affine { mul: node.nat(0)?, add: node.nat_or(1, 0)? },
        "subtract" => FuncExpr::Subtract(node.nat(0)?),
        "successor" => FuncExpr::Affine { mul: 1, add: 1 },
        "predecessor" => FuncExpr::Subtract(1),
        "xor" => FuncExpr::Xor(node.nat(0)?),
        "block_reverse" => FuncExpr::BlockReverse(positive(&node, 0)?),
        "floor_div" => FuncExpr::FloorDiv(positive(&node, 0)?),
        "factorial" => FuncExpr::Factorial,
        "valuation" | "ruler_collapse" => ruler_collapse().expr().clone(),
        "power_code" => power_code(&node.func(0)?).expr().clone(),
        "compose" => {
            node.arity(2)?;
            FuncExpr::compose(node.func(0)?.expr().clone(), node.func(1)?.expr().clone())
        }
        "indicator" => FuncExpr::Indicator(Arc::new(node.set(0)?.expr().clone())),
        "principal" => FuncExpr::Principal(Arc::new(node.set(0)?.expr().clone())),
        "factorial_swap" => PermSpec::factorial_swap(&node.set(0)?).forward().expr().clone(),
        "table" => {
            let (v, p) = node.arg(0)?;
            let Value::Array(items) = v else { return err(&p, "expected an array of naturals or null") };
            let values = items
                .iter()
                .enumerate()
                .map(|(j, x)| if x.is_null() { Ok(None) } else { nat(x, &format!("{p}[{j}]")).map(Some) })
                .collect::<Result<Vec<_>, _>>()?;
            FuncExpr::table(values)
        }
        "table_file" => {
            let table = table_file(&node)?;
            FuncExpr::table(table.into_iter().map(Some))
        }
        other => return err(path, format!("unknown func combinator {other:?}")),
    };
    let expr = if node.delays.is_empty() { expr } else { FuncExpr::delayed(expr, node.delays) };
    Ok(FuncSpec::new(name, expr))
}

fn positive(node: &Node<'_>, i: usize) -> Result<Nat, SpecError> {
    let n = node.nat(i)?;
    if n == 0 {
        return err(&node.arg_path(i), "must be positive");
    }
    Ok(n)
}

/// Values of an `n,value` CSV table, which must list `n = 0, 1, ...` in order.
fn table_file(node: &Node<'_>) -> Result<Vec<Nat>, SpecError> {
    let (v, p) = node.arg(0)?;
    let Some(file) = v.as_str() else { return err(&p, "expected a file path") };
    let mut reader = csv::Reader::from_path(file).or_else(|e| err(&p, format!("{file}: {e}")))?;
    let mut values = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.or_else(|e| err(&p, format!("{file}: {e}")))?;
        let field = |j: usize| row.get(j).and_then(|x| x.parse::<Nat>().ok());
        match (field(0), field(1)) {
            (Some(n), Some(value)) if n == i as Nat => values.push(value),
            _ => return err(&p, format!("{file}: row {} is not \"{i},<value>\"", i + 2)),
        }
    }
    Ok(values)
}

pub fn parse_perm(v: &Value, path: &str) -> Result<PermSpec, SpecError> {
    let node = Node::read(v, path, "perm")?;
    let name = node.name();
    let perm = match node.combinator.as_str() {
        "identity" => PermSpec::identity(),
        "xor" => PermSpec::from_forward(name.clone(), FuncExpr::Xor(node.nat(0)?)).expect("xor is an involution"),
        "block_reverse" => PermSpec::from_forward(name.clone(), FuncExpr::BlockReverse(positive(&node, 0)?))
            .expect("block reversal is an involution"),
        "factorial_swap" => PermSpec::factorial_swap(&node.set(0)?),
        "explicit" => {
            node.arity(2)?;
            PermSpec::new(name.clone(), node.func(0)?, node.func(1)?)
        }
        "table_file" => {
            let table = table_file(&node)?;
            let inverse: BTreeMap<Nat, Nat> = table.iter().enumerate().map(|(n, &v)| (v, n as Nat)).collect();
            if inverse.len() != table.len() {
                return err(&node.arg_path(0), "table is not injective");
            }
            PermSpec::new(
                name.clone(),
                FuncSpec::new(name.clone(), FuncExpr::table(table.into_iter().map(Some))),
                FuncSpec::new(format!("{name}^-1"), FuncExpr::Sparse(Arc::new(inverse))),
            )
        }
        other => return err(path, format!("unknown perm combinator {other:?}")),
    };
    if !node.delays.is_empty() {
        return err(&format!("{path}.delays"), "delays go on the forward and inverse functions of an explicit perm");
    }
    Ok(perm)
}

/// A family member: `kind` decides, and untagged entries are read as
/// permutations first.
pub fn parse_mapping(v: &Value, path: &str) -> Result<Mapping, SpecError> {
    match v.get("kind").and_then(Value::as_str).map(normalize).as_deref() {
        Some("func") => parse_func(v, path).map(Mapping::Func),
        Some("perm") | None => parse_perm(v, path).map(Mapping::Perm).or_else(|e| match v {
            Value::String(s) => parse_func(v, path).map(Mapping::Func).map_err(|f| {
                if e.message.starts_with("unknown") && f.message.starts_with("unknown") {
                    SpecError { path: path.to_string(), message: format!("unknown perm or func combinator {s:?}") }
                } else {
                    e
                }
            }),
            _ => Err(e),
        }),
        Some(other) => err(&format!("{path}.kind"), format!("expected \"func\" or \"perm\", found {other:?}")),
    }
}

fn parse_mode(s: &str, path: &str) -> Result<Mode, SpecError> {
    Ok(match normalize(s).as_str() {
        "generic" => Mode::Generic,
        "coarse" => Mode::Coarse,
        "dense" => Mode::Dense,
        "effective_dense" => Mode::EffectiveDense,
        other => return err(path, format!("unknown mode {other:?}")),
    })
}

fn parse_answer(v: &Value, path: &str) -> Result<Answer, SpecError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => normalize(s),
        _ => return err(path, "expected 0, 1, \"box\" or \"diverge\""),
    };
    Ok(match text.as_str() {
        "0" => Answer::Zero,
        "1" => Answer::One,
        "box" => Answer::Box,
        "diverge" | "diverged" => Answer::Diverged,
        other => return err(path, format!("unknown answer {other:?}")),
    })
}

pub fn parse_description(v: &Value, path: &str) -> Result<Description, SpecError> {
    let node = Node::read(v, path, "description")?;
    let name = node.name();
    let mode = match &node.mode {
        Some(m) => Some(parse_mode(m, &format!("{path}.mode"))?),
        None => None,
    };
    let build = |expr: DescExpr, default: Mode| Description::new(name.clone(), mode.unwrap_or(default), expr);
    let desc = match node.combinator.as_str() {
        "characteristic" => build(DescExpr::Indicator(Arc::new(node.set(0)?.expr().clone())), Mode::Generic),
        "constant" => {
            let (v, p) = node.arg(0)?;
            build(DescExpr::Constant(parse_answer(v, &p)?), Mode::Generic)
        }
        "box_on" => build(
            DescExpr::BoxOn { boxes: Arc::new(node.set(0)?.expr().clone()), otherwise: Arc::new(node.desc(1)?.expr().clone()) },
            Mode::EffectiveDense,
        ),
        "diverge_on" => build(
            DescExpr::DivergeOn { set: Arc::new(node.set(0)?.expr().clone()), otherwise: Arc::new(node.desc(1)?.expr().clone()) },
            Mode::Generic,
        ),
        "from_func" => build(DescExpr::FromFunc(Arc::new(node.func(0)?.expr().clone())), Mode::Generic),
        "total" => combine_total(&node.desc(0)?, node.nat(1)?),
        "factorial_code" => {
            let d = factorial_code(&node.set(0)?).1;
            Description::new(d.name().to_string(), mode.unwrap_or(d.mode()), d.expr().clone())
        }
        other => return err(path, format!("unknown description combinator {other:?}")),
    };
    if !node.delays.is_empty() {
        return err(&format!("{path}.delays"), "descriptions take delays through their sets and functions");
    }
    Ok(desc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use density_forge_core::set_calculus::Verdict;
    use serde_json::json;

    #[test]
    fn shorthands_and_objects_agree() {
        let a = parse_set(&json!("evens"), "$").unwrap();
        let b = parse_set(&json!({"combinator": "periodic", "args": [2, [0]]}), "$").unwrap();
        assert!((0..20).all(|n| a.membership(n, 100) == b.membership(n, 100)));
        let r = parse_set(&json!("random:3:1:2"), "$").unwrap();
        let direct = SetSpec::random(3, 1, 2);
        assert!((0..200).all(|n| r.membership(n, 100) == direct.membership(n, 100)));
    }

    #[test]
    fn delays_apply() {
        let s = parse_set(&json!({"kind": "set", "combinator": "omega", "delays": {"5": 100, "6": "never"}}), "$").unwrap();
        assert_eq!(s.membership(5, 10), Verdict::Unknown);
        assert_eq!(s.membership(5, 1000), Verdict::In);
        assert_eq!(s.membership(6, u64::MAX), Verdict::Unknown);
    }

    #[test]
    fn errors_carry_paths() {
        let e = parse_set(&json!({"combinator": "union", "args": ["evens", {"combinator": "ruler", "args": ["x"]}]}), "$")
            .unwrap_err();
        assert_eq!(e.path, "$.args[1].args[0]");
        let e = parse_set(&json!({"kind": "func", "combinator": "identity"}), "$").unwrap_err();
        assert_eq!(e.path, "$.kind");
        let e = parse_set(&json!({"combinator": "nope"}), "$").unwrap_err();
        assert!(e.message.contains("nope"));
    }

    #[test]
    fn families_mix_kinds() {
        let m = parse_mapping(&json!("identity"), "$").unwrap();
        assert!(matches!(m, Mapping::Perm(_)));
        let m = parse_mapping(&json!({"kind": "func", "combinator": "affine", "args": [2, 1]}), "$").unwrap();
        assert!(matches!(m, Mapping::Func(_)));
        let m = parse_mapping(&json!("valuation"), "$").unwrap();
        assert!(matches!(m, Mapping::Func(_)));
    }
}
