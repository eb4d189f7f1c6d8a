use std::fmt;
use std::sync::{Arc, Mutex};

use crate::parser::Expr;
use crate::values::Value;

/// Lexical environment: a persistent linked chain of single-name frames.
/// Lookups walk from the innermost frame outwards.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<Frame>>);

pub struct Frame {
    key: String,
    pub(crate) name: String,
    pub(crate) slot: Mutex<Slot>,
    parent: Env,
}

/// Binding state. Moves only forward: pending, in progress, ready.
pub(crate) enum Slot {
    Pending(Arc<Expr>),
    InProgress,
    Ready(Value),
}

pub(crate) fn name_key(name: &str) -> String {
    name.to_uppercase()
}

impl Env {
    pub fn root() -> Self {
        Env(None)
    }

    pub(crate) fn bind_value(&self, name: &str, value: Value) -> Env {
        self.push(name, Slot::Ready(value))
    }

    pub(crate) fn bind_lazy(&self, name: &str, expr: Arc<Expr>) -> Env {
        self.push(name, Slot::Pending(expr))
    }

    fn push(&self, name: &str, slot: Slot) -> Env {
        Env(Some(Arc::new(Frame {
            key: name_key(name),
            name: name.to_string(),
            slot: Mutex::new(slot),
            parent: self.clone(),
        })))
    }

    pub(crate) fn lookup(&self, key: &str) -> Option<&Arc<Frame>> {
        let mut cur = self.0.as_ref();
        while let Some(frame) = cur {
            if frame.key == key {
                return Some(frame);
            }
            cur = frame.parent.0.as_ref();
        }
        None
    }

    /// Environment whose innermost frame is `frame`.
    pub(crate) fn at(frame: &Arc<Frame>) -> Env {
        Env(Some(frame.clone()))
    }

    pub fn is_root(&self) -> bool {
        self.0.is_none()
    }

    pub(crate) fn ptr_eq(&self, other: &Env) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// Visible names, innermost first.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = self.0.as_ref();
        while let Some(frame) = cur {
            out.push(frame.name.clone());
            cur = frame.parent.0.as_ref();
        }
        out
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
