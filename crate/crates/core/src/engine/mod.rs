//! Workbook model and recalculation.
//!
//! Recalculation runs in passes. Each pass takes the changed cells, expands
//! them to every formula that statically reads them, orders that batch by
//! strongly connected components and evaluates it. Spill placement happens
//! as each anchor finishes; cells whose visible value changed behind a
//! reader's back (new spill members, evictions, re-placements) seed the
//! next pass.

mod address;
mod deps;
mod format;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

pub use address::{CellAddress, Reference, SheetId};
pub use deps::Deps;
pub use format::{parse_input, parse_workbook, FormatError};

use crate::eval::{Evaluator, Resolver, Trace, DEFAULT_MAX_RECURSION};
use crate::parser::{is_plain_identifier, parse_a1, print_formula, Expr, ParseError};
use crate::stdlib;
use crate::values::{Array, ErrorKind, Scalar, Value, XlError};

const MAX_PASSES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Content {
    Literal(Scalar),
    Formula { source: String, expr: Arc<Expr> },
}

impl Content {
    pub fn formula(source: &str) -> Result<Content, ParseError> {
        let expr = crate::parser::parse_formula(source)?;
        Ok(Content::Formula {
            source: source.trim().to_string(),
            expr: Arc::new(expr),
        })
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Content::Literal(Scalar::Empty))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefinedName {
    pub name: String,
    pub source: String,
    pub expr: Arc<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpillRegion {
    pub anchor: CellAddress,
    pub rows: usize,
    pub cols: usize,
}

impl SpillRegion {
    pub fn reference(&self) -> Reference {
        Reference::block(self.anchor, self.rows, self.cols).expect("placed regions fit the grid")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("name {0} would shadow a built-in function")]
    NameCollision(String),
    #[error("{0} is not a valid defined name")]
    InvalidName(String),
    #[error("unknown sheet {0}")]
    UnknownSheet(String),
    #[error("invalid cell address {0}")]
    InvalidAddress(String),
    #[error("parse error in {context}: {error}")]
    Parse { context: String, error: ParseError },
}

#[derive(Clone, Debug)]
pub struct Config {
    pub max_recursion: usize,
    pub trace: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_recursion: DEFAULT_MAX_RECURSION,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CalcReport {
    /// Formula evaluations performed, counting re-evaluations.
    pub evaluated: usize,
    pub passes: usize,
    /// Regions that were placed during this recalculation.
    pub spills: Vec<SpillRegion>,
    /// Formula cells whose result is an error, in address order.
    pub errors: Vec<(CellAddress, XlError)>,
}

#[derive(Clone, Debug, Default)]
struct Sheet {
    name: String,
    cells: BTreeMap<(u32, u32), Content>,
}

#[derive(Clone, Debug)]
pub struct Workbook {
    sheets: Vec<Sheet>,
    names: BTreeMap<String, DefinedName>,
    deps: HashMap<CellAddress, Deps>,
    /// Raw results of formula cells: scalars, or arrays for anchors.
    results: HashMap<CellAddress, Value>,
    spills: BTreeMap<CellAddress, SpillRegion>,
    members: HashMap<CellAddress, CellAddress>,
    /// Anchors whose array could not be placed, with the extent they wanted.
    blocked: BTreeMap<CellAddress, (Reference, XlError)>,
    dirty: BTreeSet<CellAddress>,
    pub config: Config,
    trace: Trace,
}

impl Default for Workbook {
    fn default() -> Self {
        Workbook::new()
    }
}

impl Workbook {
    /// A workbook with one sheet named `Sheet1`.
    pub fn new() -> Self {
        Workbook {
            sheets: vec![Sheet {
                name: "Sheet1".into(),
                cells: BTreeMap::new(),
            }],
            names: BTreeMap::new(),
            deps: HashMap::new(),
            results: HashMap::new(),
            spills: BTreeMap::new(),
            members: HashMap::new(),
            blocked: BTreeMap::new(),
            dirty: BTreeSet::new(),
            config: Config::default(),
            trace: Trace::default(),
        }
    }

    // ---- sheets and addresses ----

    pub fn add_sheet(&mut self, name: &str) -> SheetId {
        if let Some(id) = self.sheet_id(name) {
            return id;
        }
        self.sheets.push(Sheet {
            name: name.to_string(),
            cells: BTreeMap::new(),
        });
        let id = SheetId(self.sheets.len() - 1);
        // Formulas may already refer to the new sheet.
        self.refresh_deps();
        self.dirty.extend(self.formula_cells());
        id
    }

    pub fn sheet_id(&self, name: &str) -> Option<SheetId> {
        self.sheets
            .iter()
            .position(|s| s.name.eq_ignore_ascii_case(name))
            .map(SheetId)
    }

    pub fn sheet_names(&self) -> Vec<&str> {
        self.sheets.iter().map(|s| s.name.as_str()).collect()
    }

    /// Parses `A1`, `Sheet!A1` or `'My Sheet'!A1` into an address.
    pub fn address(&self, text: &str) -> Result<CellAddress, EngineError> {
        let (sheet, cell) = self.split_sheet(text)?;
        let c = parse_a1(cell.trim_start_matches('$').replace('$', "").as_str())
            .ok_or_else(|| EngineError::InvalidAddress(text.to_string()))?;
        Ok(CellAddress::new(sheet, c.row, c.col))
    }

    /// Parses a cell, range (`A1:B3`) or spill reference (`A1#`).
    pub fn reference(&self, text: &str) -> Result<Reference, EngineError> {
        if let Some(anchor) = text.strip_suffix('#') {
            let a = self.address(anchor)?;
            return Ok(self
                .spills
                .get(&a)
                .map(SpillRegion::reference)
                .unwrap_or_else(|| Reference::cell(a)));
        }
        let (sheet, body) = self.split_sheet(text)?;
        let bad = || EngineError::InvalidAddress(text.to_string());
        let mut parts = body.split(':');
        let a = parse_a1(&parts.next().ok_or_else(bad)?.replace('$', "")).ok_or_else(bad)?;
        let b = match parts.next() {
            Some(p) => parse_a1(&p.replace('$', "")).ok_or_else(bad)?,
            None => a,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(Reference {
            sheet,
            top: a.row.min(b.row),
            left: a.col.min(b.col),
            bottom: a.row.max(b.row),
            right: a.col.max(b.col),
        })
    }

    fn split_sheet<'t>(&self, text: &'t str) -> Result<(SheetId, &'t str), EngineError> {
        match text.rfind('!') {
            None => Ok((SheetId(0), text)),
            Some(i) => {
                let raw = &text[..i];
                let name = raw
                    .strip_prefix('\'')
                    .and_then(|s| s.strip_suffix('\''))
                    .map(|s| s.replace("''", "'"))
                    .unwrap_or_else(|| raw.to_string());
                let id = self
                    .sheet_id(&name)
                    .ok_or(EngineError::UnknownSheet(name))?;
                Ok((id, &text[i + 1..]))
            }
        }
    }

    pub fn qualified(&self, a: CellAddress) -> String {
        format!("{}!{}", self.sheets[a.sheet.0].name, a.a1())
    }

    // ---- editing ----

    pub fn content(&self, addr: CellAddress) -> Option<&Content> {
        self.sheets
            .get(addr.sheet.0)?
            .cells
            .get(&(addr.row, addr.col))
    }

    /// Replaces a cell's content. Returns the edited cell and everything
    /// that must be recomputed because of it.
    pub fn set_cell(&mut self, addr: CellAddress, content: Content) -> Vec<CellAddress> {
        let sheet = &mut self.sheets[addr.sheet.0].cells;
        if content.is_empty() {
            sheet.remove(&(addr.row, addr.col));
        } else {
            sheet.insert((addr.row, addr.col), content.clone());
        }
        let mut changed = vec![addr];
        self.results.remove(&addr);
        match &content {
            Content::Formula { expr, .. } => {
                let d = self.collect_deps(expr, addr.sheet);
                self.deps.insert(addr, d);
            }
            Content::Literal(_) => {
                self.deps.remove(&addr);
            }
        }
        // An anchor that stops being one frees its region.
        if let Some(region) = self.spills.remove(&addr) {
            for c in region.reference().cells() {
                self.members.remove(&c);
                changed.push(c);
            }
        }
        self.blocked.remove(&addr);
        // Writing into a region blocks its anchor; clearing a cell may
        // unblock one.
        if let Some(anchor) = self.members.get(&addr).copied() {
            changed.push(anchor);
        }
        for (anchor, (want, _)) in &self.blocked {
            if want.contains(&addr) {
                changed.push(*anchor);
            }
        }
        self.dirty.extend(changed.iter().copied());
        let seeds: BTreeSet<CellAddress> = changed.iter().copied().collect();
        let mut out: BTreeSet<CellAddress> = self.expand(&seeds);
        out.extend(changed);
        out.into_iter().collect()
    }

    /// Parses `text` as cell input (a formula when it starts with `=`).
    pub fn set_input(&mut self, addr: CellAddress, text: &str) -> Result<Vec<CellAddress>, EngineError> {
        let content = parse_input(text).map_err(|error| EngineError::Parse {
            context: self.qualified(addr),
            error,
        })?;
        Ok(self.set_cell(addr, content))
    }

    pub fn define_name(&mut self, name: &str, formula: &str) -> Result<(), EngineError> {
        if !is_plain_identifier(name) {
            return Err(EngineError::InvalidName(name.to_string()));
        }
        let key = name.to_uppercase();
        if stdlib::lookup(&key).is_some() {
            return Err(EngineError::NameCollision(name.to_string()));
        }
        let expr = crate::parser::parse_formula(formula).map_err(|error| EngineError::Parse {
            context: format!("name {name}"),
            error,
        })?;
        self.names.insert(
            key.clone(),
            DefinedName {
                name: name.to_string(),
                source: formula.trim().to_string(),
                expr: Arc::new(expr),
            },
        );
        self.refresh_deps();
        let referents: Vec<CellAddress> = self
            .deps
            .iter()
            .filter(|(_, d)| d.names.contains(&key))
            .map(|(a, _)| *a)
            .collect();
        self.dirty.extend(referents);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &DefinedName> {
        self.names.values()
    }

    pub fn name(&self, name: &str) -> Option<&DefinedName> {
        self.names.get(&name.to_uppercase())
    }

    fn collect_deps(&self, expr: &Expr, sheet: SheetId) -> Deps {
        let by_name = |n: &str| self.sheet_id(n);
        let name_expr = |k: &str| self.names.get(k).map(|d| d.expr.clone());
        deps::collect(
            expr,
            &deps::DepCtx {
                sheet,
                sheet_by_name: &by_name,
                name_expr: &name_expr,
            },
        )
    }

    fn refresh_deps(&mut self) {
        let mut fresh = HashMap::new();
        for addr in self.formula_cells() {
            if let Some(Content::Formula { expr, .. }) = self.content(addr) {
                fresh.insert(addr, self.collect_deps(expr, addr.sheet));
            }
        }
        self.deps = fresh;
    }

    fn formula_cells(&self) -> Vec<CellAddress> {
        let mut out = Vec::new();
        for (i, s) in self.sheets.iter().enumerate() {
            for (&(row, col), c) in &s.cells {
                if matches!(c, Content::Formula { .. }) {
                    out.push(CellAddress::new(SheetId(i), row, col));
                }
            }
        }
        out
    }

    /// Every formula cell, including clean ones, is recomputed next time.
    pub fn invalidate_all(&mut self) {
        self.dirty.extend(self.formula_cells());
    }

    // ---- reading results ----

    /// Displayed value of a cell.
    pub fn value(&self, addr: CellAddress) -> Scalar {
        if let Some(anchor) = self.members.get(&addr) {
            if let (Some(region), Some(Value::Array(a))) =
                (self.spills.get(anchor), self.results.get(anchor))
            {
                let r = (addr.row - region.anchor.row) as usize;
                let c = (addr.col - region.anchor.col) as usize;
                return a.get(r, c).clone();
            }
        }
        if let Some((_, e)) = self.blocked.get(&addr) {
            return Scalar::Error(e.clone());
        }
        match self.results.get(&addr) {
            Some(Value::Scalar(s)) => return s.clone(),
            Some(Value::Array(a)) => return a.get(0, 0).clone(),
            Some(_) => return Scalar::error(ErrorKind::Calc),
            None => {}
        }
        match self.content(addr) {
            Some(Content::Literal(s)) => s.clone(),
            _ => Scalar::Empty,
        }
    }

    /// Values of a rectangle as an array.
    pub fn range_values(&self, r: &Reference) -> Array {
        Array::from_fn(r.rows(), r.cols(), |i, j| {
            self.value(CellAddress::new(r.sheet, r.top + i as u32, r.left + j as u32))
        })
    }

    /// The full result of a formula cell (an array for spill anchors).
    pub fn result(&self, addr: CellAddress) -> Option<&Value> {
        self.results.get(&addr)
    }

    pub fn spill_region(&self, anchor: CellAddress) -> Option<SpillRegion> {
        self.spills.get(&anchor).copied()
    }

    pub fn spill_anchor_of(&self, addr: CellAddress) -> Option<CellAddress> {
        self.members.get(&addr).copied()
    }

    pub fn spill_regions(&self) -> impl Iterator<Item = &SpillRegion> {
        self.spills.values()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut Trace {
        &mut self.trace
    }

    pub fn deps(&self, addr: CellAddress) -> Option<&Deps> {
        self.deps.get(&addr)
    }

    /// Evaluates formula text against the current grid without storing it.
    /// Trace lines go to the workbook trace under scope `repl`.
    pub fn evaluate_formula(&mut self, source: &str) -> Result<Value, ParseError> {
        let expr = crate::parser::parse_formula(source)?;
        let mut trace = std::mem::take(&mut self.trace);
        trace.enabled = self.config.trace;
        let v = {
            let mut ev = Evaluator::new(&*self, SheetId(0), None, self.config.max_recursion, &mut trace);
            let v = ev.eval_formula(&expr);
            grid_result(ev.deref(v))
        };
        self.trace = trace;
        Ok(v)
    }

    // ---- recalculation ----

    pub fn recalculate(&mut self) -> CalcReport {
        self.trace.clear();
        let mut trace = std::mem::take(&mut self.trace);
        trace.enabled = self.config.trace;
        let mut report = CalcReport::default();
        let mut seeds: BTreeSet<CellAddress> = std::mem::take(&mut self.dirty);
        let mut failed_to_settle = BTreeSet::new();
        while !seeds.is_empty() {
            if report.passes == MAX_PASSES {
                failed_to_settle = seeds;
                break;
            }
            report.passes += 1;
            seeds = self.pass(seeds, &mut trace, &mut report);
        }
        // Cells still oscillating after the pass budget are cyclic in effect.
        for addr in failed_to_settle {
            if self.deps.contains_key(&addr) {
                self.store(addr, Value::err_detail(ErrorKind::Circular, "did not settle"), &mut Vec::new());
            }
        }
        self.trace = trace;
        report.errors = self
            .formula_cells()
            .into_iter()
            .filter_map(|a| self.value(a).as_error().cloned().map(|e| (a, e)))
            .collect();
        report
    }

    fn pass(
        &mut self,
        seeds: BTreeSet<CellAddress>,
        trace: &mut Trace,
        report: &mut CalcReport,
    ) -> BTreeSet<CellAddress> {
        let batch = self.expand(&seeds);
        let order = self.schedule(&batch);
        let mut evaluated_at: HashMap<CellAddress, usize> = HashMap::new();
        // (time, cell) pairs of values that changed during this pass.
        let mut changes: Vec<(usize, CellAddress)> = Vec::new();
        let mut clock = 0usize;
        for (scc, cyclic) in order {
            for &addr in &scc {
                clock += 1;
                let v = if cyclic {
                    Value::err_detail(ErrorKind::Circular, format!("{} is on a cycle", self.qualified(addr)))
                } else {
                    report.evaluated += 1;
                    self.eval_cell(addr, trace)
                };
                let before = self.snapshot(addr);
                let mut changed = Vec::new();
                if let Some(region) = self.store(addr, v, &mut changed) {
                    report.spills.push(region);
                }
                evaluated_at.insert(addr, clock);
                for c in changed {
                    let was = before.get(&c).cloned().unwrap_or(Scalar::Empty);
                    if was != self.value(c) || !before.contains_key(&c) && self.members.contains_key(&c) {
                        changes.push((clock, c));
                    }
                }
            }
        }
        // Give blocked anchors another chance now that cells may be free.
        clock += 1;
        let blocked: Vec<CellAddress> = self.blocked.keys().copied().collect();
        for anchor in blocked {
            let mut changed = Vec::new();
            if let Some(region) = self.retry_placement(anchor, &mut changed) {
                report.spills.push(region);
            }
            changes.extend(changed.into_iter().map(|c| (clock, c)));
        }
        let mut next = BTreeSet::new();
        for (t, c) in changes {
            for reader in self.readers(&c) {
                let stale = evaluated_at.get(&reader).is_none_or(|&at| at < t);
                if stale && reader != c {
                    next.insert(reader);
                }
            }
        }
        next
    }

    fn eval_cell(&self, addr: CellAddress, trace: &mut Trace) -> Value {
        let Some(Content::Formula { expr, .. }) = self.content(addr) else {
            return Value::Scalar(Scalar::Empty);
        };
        let expr = expr.clone();
        let mut ev = Evaluator::new(self, addr.sheet, Some(addr), self.config.max_recursion, trace);
        let v = ev.eval_formula(&expr);
        grid_result(ev.deref(v))
    }

    /// Cells whose content or result changing may affect formulas.
    fn expand(&self, seeds: &BTreeSet<CellAddress>) -> BTreeSet<CellAddress> {
        let mut batch = BTreeSet::new();
        let mut seen: BTreeSet<CellAddress> = BTreeSet::new();
        let mut work: Vec<CellAddress> = seeds.iter().copied().collect();
        while let Some(c) = work.pop() {
            if !seen.insert(c) {
                continue;
            }
            if self.deps.contains_key(&c) {
                batch.insert(c);
                if let Some(fp) = self.footprint(c) {
                    for m in fp.cells() {
                        if !seen.contains(&m) {
                            work.push(m);
                        }
                    }
                }
            }
            for r in self.readers(&c) {
                if !seen.contains(&r) {
                    work.push(r);
                }
            }
        }
        batch
    }

    /// Visible values of a cell and everything it currently spills over.
    fn snapshot(&self, addr: CellAddress) -> HashMap<CellAddress, Scalar> {
        let mut out = HashMap::new();
        out.insert(addr, self.value(addr));
        if let Some(r) = self.spills.get(&addr) {
            for c in r.reference().cells() {
                out.insert(c, self.value(c));
            }
        }
        out
    }

    /// The extent an anchor occupies or wants to occupy.
    fn footprint(&self, addr: CellAddress) -> Option<Reference> {
        if let Some(r) = self.spills.get(&addr) {
            return Some(r.reference());
        }
        self.blocked.get(&addr).map(|(r, _)| *r)
    }

    /// Formula cells that read `c`, directly or through its spill anchor.
    fn readers(&self, c: &CellAddress) -> Vec<CellAddress> {
        let anchor = self.members.get(c).copied();
        let mut out: Vec<CellAddress> = self
            .deps
            .iter()
            .filter(|(_, d)| d.reads(c) || anchor.is_some_and(|a| d.spills.contains(&a)))
            .map(|(a, _)| *a)
            .collect();
        out.sort();
        out
    }

    /// Strongly connected components of the batch in dependency order.
    fn schedule(&self, batch: &BTreeSet<CellAddress>) -> Vec<(Vec<CellAddress>, bool)> {
        let nodes: Vec<CellAddress> = batch.iter().copied().collect();
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (i, x) in nodes.iter().enumerate() {
            let d = &self.deps[x];
            for (j, y) in nodes.iter().enumerate() {
                let mut hit = d.reads(y);
                if !hit {
                    if let Some(fp) = self.footprint(*y) {
                        hit = d.reads_area(&fp);
                    }
                }
                if hit {
                    edges[i].push(j);
                }
            }
        }
        tarjan(&edges)
            .into_iter()
            .map(|comp| {
                let cyclic = comp.len() > 1 || edges[comp[0]].contains(&comp[0]);
                let mut cells: Vec<CellAddress> = comp.into_iter().map(|i| nodes[i]).collect();
                cells.sort();
                (cells, cyclic)
            })
            .collect()
    }

    /// Records a formula result and places or vacates its spill. Cells whose
    /// visible value may have changed are pushed to `changed`.
    fn store(
        &mut self,
        addr: CellAddress,
        v: Value,
        changed: &mut Vec<CellAddress>,
    ) -> Option<SpillRegion> {
        changed.push(addr);
        if let Some(old) = self.spills.remove(&addr) {
            for c in old.reference().cells() {
                self.members.remove(&c);
                changed.push(c);
            }
        }
        self.blocked.remove(&addr);
        let is_array = matches!(v, Value::Array(_));
        self.results.insert(addr, v);
        if is_array {
            self.retry_placement(addr, changed)
        } else {
            None
        }
    }

    /// Tries to place the array result of `anchor`. On failure the anchor is
    /// recorded as blocked with the blocking cell in the diagnostic.
    fn retry_placement(&mut self, anchor: CellAddress, changed: &mut Vec<CellAddress>) -> Option<SpillRegion> {
        let (rows, cols) = match self.results.get(&anchor) {
            Some(Value::Array(a)) => a.shape(),
            _ => return None,
        };
        let want = match Reference::block(anchor, rows, cols) {
            Some(r) => r,
            None => {
                let clipped = Reference {
                    sheet: anchor.sheet,
                    top: anchor.row,
                    left: anchor.col,
                    bottom: (anchor.row as u64 + rows as u64 - 1).min(crate::parser::MAX_ROWS as u64) as u32,
                    right: (anchor.col as u64 + cols as u64 - 1).min(crate::parser::MAX_COLS as u64) as u32,
                };
                self.set_blocked(anchor, clipped, "spill runs past the edge of the grid".into(), changed);
                return None;
            }
        };
        let mut evict = Vec::new();
        for c in want.cells() {
            if c == anchor {
                continue;
            }
            if self.content(c).is_some() {
                let msg = format!("blocked by {}", self.qualified(c));
                self.set_blocked(anchor, want, msg, changed);
                return None;
            }
            if let Some(&other) = self.members.get(&c) {
                if other != anchor {
                    if other < anchor {
                        let msg = format!("blocked by the spill of {}", self.qualified(other));
                        self.set_blocked(anchor, want, msg, changed);
                        return None;
                    }
                    if !evict.contains(&other) {
                        evict.push(other);
                    }
                }
            }
        }
        for other in evict {
            if let Some(region) = self.spills.remove(&other) {
                for c in region.reference().cells() {
                    self.members.remove(&c);
                    changed.push(c);
                }
                let msg = format!("blocked by the spill of {}", self.qualified(anchor));
                self.set_blocked(other, region.reference(), msg, changed);
            }
        }
        let was_blocked = self.blocked.remove(&anchor).is_some();
        let region = SpillRegion { anchor, rows, cols };
        for c in want.cells() {
            self.members.insert(c, anchor);
            if c != anchor || was_blocked {
                changed.push(c);
            }
        }
        self.spills.insert(anchor, region);
        Some(region)
    }

    fn set_blocked(&mut self, anchor: CellAddress, want: Reference, msg: String, changed: &mut Vec<CellAddress>) {
        let fresh = !self.blocked.contains_key(&anchor);
        self.blocked
            .insert(anchor, (want, XlError::with_detail(ErrorKind::Spill, msg)));
        if fresh {
            changed.push(anchor);
        }
    }

    /// Workbook text for the current content; see `parse_workbook`.
    pub fn to_text(&self) -> String {
        format::write_workbook(self)
    }

    /// Smallest rectangle covering every cell with content or a spilled value.
    pub fn used_range(&self, sheet: SheetId) -> Option<Reference> {
        let mut areas = self
            .cells_of(sheet)
            .map(|(a, _)| Reference::cell(a))
            .chain(self.spills.values().filter(|s| s.anchor.sheet == sheet).map(SpillRegion::reference));
        let first = areas.next()?;
        Some(areas.fold(first, |acc, r| Reference {
            sheet,
            top: acc.top.min(r.top),
            left: acc.left.min(r.left),
            bottom: acc.bottom.max(r.bottom),
            right: acc.right.max(r.right),
        }))
    }

    pub(crate) fn cells_of(&self, sheet: SheetId) -> impl Iterator<Item = (CellAddress, &Content)> {
        self.sheets[sheet.0]
            .cells
            .iter()
            .map(move |(&(r, c), content)| (CellAddress::new(sheet, r, c), content))
    }
}

/// Value shown in the grid for a formula result.
fn grid_result(v: Value) -> Value {
    match v {
        Value::Scalar(Scalar::Empty) | Value::Omitted => Value::number(0.0),
        Value::Lambda(_) => Value::err_detail(ErrorKind::Calc, "a LAMBDA cannot be shown in a cell"),
        other => other,
    }
}

impl Resolver for Workbook {
    fn sheet_by_name(&self, name: &str) -> Option<SheetId> {
        self.sheet_id(name)
    }

    fn sheet_name(&self, id: SheetId) -> String {
        self.sheets
            .get(id.0)
            .map(|s| s.name.clone())
            .unwrap_or_default()
    }

    fn cell_value(&self, addr: CellAddress) -> Scalar {
        self.value(addr)
    }

    fn spill_range(&self, anchor: CellAddress) -> Result<Reference, XlError> {
        if let Some(r) = self.spills.get(&anchor) {
            return Ok(r.reference());
        }
        let q = self.qualified(anchor);
        if self.blocked.contains_key(&anchor) {
            return Err(XlError::with_detail(ErrorKind::Ref, format!("{q} shows #SPILL!")));
        }
        Err(XlError::with_detail(ErrorKind::Ref, format!("{q} is not a spill anchor")))
    }

    fn defined_name(&self, key: &str) -> Option<(String, Arc<Expr>)> {
        self.names.get(key).map(|d| (d.name.clone(), d.expr.clone()))
    }
}

/// Tarjan's algorithm; components come out dependencies first.
fn tarjan(edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'e> {
        edges: &'e [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn strong(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.edges[v] {
            match s.index[w] {
                None => {
                    stacker::maybe_grow(32 * 1024, 1024 * 1024, || strong(s, w));
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("tarjan stack");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let n = edges.len();
    let mut s = State {
        edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            strong(&mut s, v);
        }
    }
    s.out
}

/// Canonical formula text for display and round-trips.
pub fn canonical_source(expr: &Expr) -> String {
    print_formula(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wb(cells: &[(&str, &str)]) -> Workbook {
        let mut w = Workbook::new();
        for (a, t) in cells {
            let addr = w.address(a).unwrap();
            w.set_input(addr, t).unwrap();
        }
        w.recalculate();
        w
    }

    fn val(w: &Workbook, a: &str) -> Scalar {
        w.value(w.address(a).unwrap())
    }

    #[test]
    fn chain_is_order_independent() {
        let fw = wb(&[("A1", "1"), ("A2", "=A1+1"), ("A3", "=A2+1")]);
        let bw = wb(&[("A3", "=A2+1"), ("A2", "=A1+1"), ("A1", "1")]);
        assert_eq!(val(&fw, "A3"), Scalar::Number(3.0));
        assert_eq!(val(&bw, "A3"), Scalar::Number(3.0));
    }

    #[test]
    fn two_cycle_is_circ() {
        let w = wb(&[("A1", "=A2"), ("A2", "=A1"), ("B1", "=A1+1")]);
        assert_eq!(val(&w, "A1").as_error().unwrap().kind, ErrorKind::Circular);
        assert_eq!(val(&w, "A2").as_error().unwrap().kind, ErrorKind::Circular);
        assert_eq!(val(&w, "B1").as_error().unwrap().kind, ErrorKind::Circular);
    }

    #[test]
    fn spill_and_readers() {
        let w = wb(&[("A1", "=SEQUENCE(3)"), ("B1", "=SUM(A1:A3)"), ("C1", "=SUM(A1#)")]);
        assert_eq!(val(&w, "A3"), Scalar::Number(3.0));
        assert_eq!(val(&w, "B1"), Scalar::Number(6.0));
        assert_eq!(val(&w, "C1"), Scalar::Number(6.0));
    }

    #[test]
    fn blocker_then_unblock() {
        let mut w = wb(&[("A1", "=SEQUENCE(3)"), ("A3", "x")]);
        let e = val(&w, "A1");
        assert_eq!(e.as_error().unwrap().kind, ErrorKind::Spill);
        assert!(e.as_error().unwrap().detail.as_deref().unwrap_or("").contains("A3"));
        assert_eq!(val(&w, "A2"), Scalar::Empty);
        let a3 = w.address("A3").unwrap();
        w.set_cell(a3, Content::Literal(Scalar::Empty));
        w.recalculate();
        assert_eq!(val(&w, "A3"), Scalar::Number(3.0));
    }

    #[test]
    fn spill_over_grid_edge() {
        let w = wb(&[("A1048575", "=SEQUENCE(3)")]);
        assert_eq!(val(&w, "A1048575").as_error().unwrap().kind, ErrorKind::Spill);
    }

    #[test]
    fn name_collision() {
        let mut w = Workbook::new();
        assert!(matches!(w.define_name("SUM", "=1"), Err(EngineError::NameCollision(_))));
        assert!(matches!(w.define_name("A1", "=1"), Err(EngineError::InvalidName(_))));
        assert!(w.define_name("rate", "=5%").is_ok());
    }
}
