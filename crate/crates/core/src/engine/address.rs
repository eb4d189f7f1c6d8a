use std::fmt;

use crate::parser::{column_letters, MAX_COLS, MAX_ROWS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SheetId(pub usize);

/// One cell of one sheet. Ordering is sheet, then row, then column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddress {
    pub sheet: SheetId,
    pub row: u32,
    pub col: u32,
}

impl CellAddress {
    pub fn new(sheet: SheetId, row: u32, col: u32) -> Self {
        debug_assert!(row >= 1 && col >= 1);
        CellAddress { sheet, row, col }
    }

    pub fn a1(&self) -> String {
        format!("{}{}", column_letters(self.col), self.row)
    }
}

/// A rectangle of cells on one sheet, inclusive on both corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Reference {
    pub sheet: SheetId,
    pub top: u32,
    pub left: u32,
    pub bottom: u32,
    pub right: u32,
}

impl Reference {
    pub fn cell(addr: CellAddress) -> Self {
        Reference {
            sheet: addr.sheet,
            top: addr.row,
            left: addr.col,
            bottom: addr.row,
            right: addr.col,
        }
    }

    /// `rows` x `cols` block anchored at `anchor`; `None` past the grid edge.
    pub fn block(anchor: CellAddress, rows: usize, cols: usize) -> Option<Self> {
        let bottom = u64::from(anchor.row) + rows as u64 - 1;
        let right = u64::from(anchor.col) + cols as u64 - 1;
        if bottom > u64::from(MAX_ROWS) || right > u64::from(MAX_COLS) {
            return None;
        }
        Some(Reference {
            sheet: anchor.sheet,
            top: anchor.row,
            left: anchor.col,
            bottom: bottom as u32,
            right: right as u32,
        })
    }

    pub fn rows(&self) -> usize {
        (self.bottom - self.top + 1) as usize
    }

    pub fn cols(&self) -> usize {
        (self.right - self.left + 1) as usize
    }

    pub fn top_left(&self) -> CellAddress {
        CellAddress::new(self.sheet, self.top, self.left)
    }

    pub fn is_single_cell(&self) -> bool {
        self.top == self.bottom && self.left == self.right
    }

    pub fn contains(&self, a: &CellAddress) -> bool {
        a.sheet == self.sheet
            && (self.top..=self.bottom).contains(&a.row)
            && (self.left..=self.right).contains(&a.col)
    }

    pub fn intersects(&self, other: &Reference) -> bool {
        self.sheet == other.sheet
            && self.top <= other.bottom
            && other.top <= self.bottom
            && self.left <= other.right
            && other.left <= self.right
    }

    pub fn cells(&self) -> impl Iterator<Item = CellAddress> + '_ {
        (self.top..=self.bottom).flat_map(move |r| {
            (self.left..=self.right).map(move |c| CellAddress::new(self.sheet, r, c))
        })
    }

    pub fn a1(&self) -> String {
        let tl = self.top_left().a1();
        if self.is_single_cell() {
            tl
        } else {
            format!(
                "{tl}:{}",
                CellAddress::new(self.sheet, self.bottom, self.right).a1()
            )
        }
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.a1())
    }
}
