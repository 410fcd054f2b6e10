use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use efce_core::{CorrelationPlan, GameDoc, GameTree, Polytope};

/// First line of every CSV this tool writes.
pub fn stamp() -> String {
    format!("# efce-lab {}\n", env!("CARGO_PKG_VERSION"))
}

pub fn load_game(path: &Path) -> Result<GameTree> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let doc = GameDoc::from_reader(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
    GameTree::from_doc(&doc).with_context(|| format!("loading {}", path.display()))
}

pub fn load_plan(poly: &Polytope, path: &Path) -> Result<CorrelationPlan> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    poly.read_plan_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

/// A buffered writer to `path`, or to stdout when absent.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_plan(poly: &Polytope, plan: &CorrelationPlan, path: &Path) -> Result<()> {
    let mut w = output(Some(path))?;
    w.write_all(stamp().as_bytes())?;
    poly.write_plan_csv(plan, &mut w)?;
    w.flush()?;
    Ok(())
}
