use std::collections::BTreeSet;

use super::{CellAddress, Reference, SheetId};
use crate::parser::Expr;

/// Static references of one formula, including those reached through
/// defined names.
#[derive(Clone, Debug, Default)]
pub struct Deps {
    pub areas: Vec<Reference>,
    /// Anchors read through `ref#`.
    pub spills: Vec<CellAddress>,
    /// Upper-cased defined names reached, directly or transitively.
    pub names: BTreeSet<String>,
}

impl Deps {
    pub fn reads(&self, c: &CellAddress) -> bool {
        self.areas.iter().any(|a| a.contains(c)) || self.spills.contains(c)
    }

    pub fn reads_area(&self, r: &Reference) -> bool {
        self.areas.iter().any(|a| a.intersects(r)) || self.spills.iter().any(|s| r.contains(s))
    }
}

pub(super) struct DepCtx<'a> {
    pub sheet: SheetId,
    pub sheet_by_name: &'a dyn Fn(&str) -> Option<SheetId>,
    pub name_expr: &'a dyn Fn(&str) -> Option<std::sync::Arc<Expr>>,
}

pub(super) fn collect(expr: &Expr, ctx: &DepCtx<'_>) -> Deps {
    let mut deps = Deps::default();
    visit(expr, ctx, &mut deps);
    deps
}

fn resolve_sheet(ctx: &DepCtx<'_>, name: Option<&str>) -> Option<SheetId> {
    match name {
        None => Some(ctx.sheet),
        Some(n) => (ctx.sheet_by_name)(n),
    }
}

fn visit(expr: &Expr, ctx: &DepCtx<'_>, deps: &mut Deps) {
    expr.walk(&mut |e| match e {
        Expr::Cell(c) => {
            if let Some(sheet) = resolve_sheet(ctx, c.sheet.as_deref()) {
                deps.areas
                    .push(Reference::cell(CellAddress::new(sheet, c.coord.row, c.coord.col)));
            }
        }
        Expr::Range(r) => {
            if let Some(sheet) = resolve_sheet(ctx, r.sheet.as_deref()) {
                deps.areas.push(Reference {
                    sheet,
                    top: r.start.row,
                    left: r.start.col,
                    bottom: r.end.row,
                    right: r.end.col,
                });
            }
        }
        Expr::Spill(inner) => {
            if let Some(anchor) = spill_anchor(inner, ctx, 0) {
                deps.spills.push(anchor);
            }
        }
        Expr::Name(n) => {
            let key = n.to_uppercase();
            if deps.names.insert(key.clone()) {
                if let Some(body) = (ctx.name_expr)(&key) {
                    visit(&body, ctx, deps);
                }
            }
        }
        _ => {}
    });
}

/// The anchor cell a spill reference points at, following names that are
/// plain cell references.
fn spill_anchor(inner: &Expr, ctx: &DepCtx<'_>, hops: usize) -> Option<CellAddress> {
    match inner {
        Expr::Cell(c) => resolve_sheet(ctx, c.sheet.as_deref())
            .map(|s| CellAddress::new(s, c.coord.row, c.coord.col)),
        Expr::Name(n) if hops < 16 => {
            let body = (ctx.name_expr)(&n.to_uppercase())?;
            spill_anchor(&body, ctx, hops + 1)
        }
        _ => None,
    }
}
