use std::fmt;
use std::sync::Arc;

/// Role a signal plays in the model.
///
/// The declaration order is significant: it is the global variable order
/// used for canonical forms (scheduling < input < output < state).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Scheduling,
    Input,
    Output,
    State,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Scheduling => "scheduling",
            Role::Input => "input",
            Role::Output => "output",
            Role::State => "state",
        }
    }
}

/// A time-dependent signal. `order` counts derivatives in continuous time
/// and forward shifts in discrete time.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signal {
    pub role: Role,
    pub name: Arc<str>,
    pub order: u32,
}

/// A typed indeterminate.
///
/// The derived ordering is the global variable order:
/// reference parameters < parameters < signals, signals ordered by
/// `(role, name, order)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indeterminate {
    /// Symbolic stand-in for a reference value of parameter `i` (1-based).
    RefParameter(u32),
    /// Unknown constant parameter `i` (1-based).
    Parameter(u32),
    Signal(Signal),
}

impl Indeterminate {
    pub fn parameter(index: u32) -> Self {
        Indeterminate::Parameter(index)
    }

    pub fn ref_parameter(index: u32) -> Self {
        Indeterminate::RefParameter(index)
    }

    pub fn signal(name: &str, role: Role, order: u32) -> Self {
        Indeterminate::Signal(Signal {
            role,
            name: Arc::from(name),
            order,
        })
    }

    pub fn is_parameter(&self) -> bool {
        matches!(self, Indeterminate::Parameter(_))
    }

    pub fn is_ref_parameter(&self) -> bool {
        matches!(self, Indeterminate::RefParameter(_))
    }

    pub fn is_signal(&self) -> bool {
        matches!(self, Indeterminate::Signal(_))
    }

    pub fn as_signal(&self) -> Option<&Signal> {
        match self {
            Indeterminate::Signal(s) => Some(s),
            _ => None,
        }
    }

    pub fn role(&self) -> Option<Role> {
        self.as_signal().map(|s| s.role)
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.role() == Some(role)
    }

    /// Derivative/shift order; 0 for parameters.
    pub fn order(&self) -> u32 {
        self.as_signal().map_or(0, |s| s.order)
    }

    /// The same signal one derivative (or shift) further. Parameters are
    /// returned unchanged.
    pub fn advanced(&self) -> Self {
        self.advanced_by(1)
    }

    pub fn advanced_by(&self, steps: u32) -> Self {
        match self {
            Indeterminate::Signal(s) => Indeterminate::Signal(Signal {
                role: s.role,
                name: s.name.clone(),
                order: s.order.checked_add(steps).expect("signal order overflow"),
            }),
            other => other.clone(),
        }
    }

    /// Same signal at order 0.
    pub fn base(&self) -> Self {
        match self {
            Indeterminate::Signal(s) => Indeterminate::Signal(Signal {
                role: s.role,
                name: s.name.clone(),
                order: 0,
            }),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indeterminate::RefParameter(i) => write!(f, "theta{i}_ref"),
            Indeterminate::Parameter(i) => write!(f, "theta{i}"),
            Indeterminate::Signal(s) if s.order == 0 => write!(f, "{}", s.name),
            Indeterminate::Signal(s) => write!(f, "{}[{}]", s.name, s.order),
        }
    }
}
