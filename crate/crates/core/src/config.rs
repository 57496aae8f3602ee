//! Size and enumeration caps.

use std::sync::OnceLock;

/// Default cap on the number of points a constructor may emit.
pub const DEFAULT_SIZE_CAP: u128 = 1 << 22;
/// Default cap on the number of linear systems a dual search may enumerate.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub size: u128,
    pub enumeration: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            size: DEFAULT_SIZE_CAP,
            enumeration: DEFAULT_ENUM_CAP,
        }
    }
}

impl Caps {
    /// Caps from the environment: `STIFFKIT_SIZE_CAP` replaces both limits.
    pub fn from_env() -> Caps {
        match std::env::var("STIFFKIT_SIZE_CAP")
            .ok()
            .and_then(|s| s.trim().parse::<u128>().ok())
        {
            Some(cap) => Caps {
                size: cap,
                enumeration: cap,
            },
            None => Caps::default(),
        }
    }
}

/// Process-wide caps, read once from the environment.
pub fn caps() -> Caps {
    static CAPS: OnceLock<Caps> = OnceLock::new();
    *CAPS.get_or_init(Caps::from_env)
}
