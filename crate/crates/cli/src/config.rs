//! `--config FILE`: TOML `key = value` pairs turned into flags.
//!
//! The generated flags are inserted right after the subcommand name, so any
//! flag given on the command line overrides them. Top-level keys are skipped
//! for subcommands without a matching flag; section keys are always passed.

use anyhow::{anyhow, Context, Result};
use toml::{Table, Value};

const SUBCOMMANDS: [&str; 7] = ["gen", "solve", "export-lp", "verify", "audit", "sweep", "stats"];
const FAMILIES: [&str; 2] = ["battleship", "sheriff"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Index after which config flags go and the name of the section that applies.
fn insertion_point(argv: &[String]) -> Option<(usize, String)> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if a == "--config" || a == "--threads" {
            i += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&a) {
            if a == "gen" && argv.get(i + 1).is_some_and(|f| FAMILIES.contains(&f.as_str())) {
                return Some((i + 1, argv[i + 1].clone()));
            }
            return Some((i, a.to_string()));
        }
        i += 1;
    }
    None
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        other => return Err(anyhow!("unsupported config value `{other}`")),
    })
}

/// What the subcommand knows about a flag: `None` if it has no such flag,
/// otherwise the value delimiter, if any.
pub type FlagInfo = Option<Option<char>>;

fn push_flag(out: &mut Vec<String>, key: &str, v: &Value, info: FlagInfo) -> Result<()> {
    let flag = format!("--{}", key.replace('_', "-"));
    match v {
        Value::Boolean(true) => out.push(flag),
        Value::Boolean(false) => {}
        Value::Array(items) => {
            if let Some(Some(d)) = info {
                let parts: Result<Vec<String>> = items.iter().map(scalar).collect();
                out.push(flag);
                out.push(parts?.join(&d.to_string()));
            } else {
                for item in items {
                    out.push(flag.clone());
                    out.push(scalar(item)?);
                }
            }
        }
        other => {
            out.push(flag);
            out.push(scalar(other)?);
        }
    }
    Ok(())
}

pub fn flags_for(table: &Table, section: &str, lookup: impl Fn(&str) -> FlagInfo) -> Result<Vec<String>> {
    let mut out = vec![];
    for (k, v) in table {
        if k == "config" || matches!(v, Value::Table(_)) {
            continue;
        }
        let info = lookup(&k.replace('_', "-"));
        if info.is_some() {
            push_flag(&mut out, k, v, info)?;
        }
    }
    if let Some(Value::Table(sub)) = table.get(section) {
        for (k, v) in sub {
            push_flag(&mut out, k, v, lookup(&k.replace('_', "-")))?;
        }
    }
    Ok(out)
}

/// `lookup(section, flag)` describes `--flag` of the subcommand `section`.
pub fn expand(mut argv: Vec<String>, lookup: impl Fn(&str, &str) -> FlagInfo) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let table: Table = text.parse().map_err(|e| anyhow!("config {path}: {e}"))?;
    let Some((at, section)) = insertion_point(&argv) else { return Ok(argv) };
    let flags = flags_for(&table, &section, |f| lookup(&section, f))?;
    argv.splice(at + 1..at + 1, flags);
    Ok(argv)
}
