//! Resource caps shared by the solvers.

use crate::error::{Error, Result};

/// Every search in the crate is bounded by one of these caps. Exceeding a cap
/// is reported as [`Error::Resource`] or as an upper-bound-only result, never
/// as a silent truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Elements enumerated in a word ball of the host group.
    pub ball_elements: usize,
    /// Cosets in a finite quotient.
    pub quotient_index: usize,
    /// Elements enumerated in a finite target group.
    pub target_order: usize,
    /// Maximal cliques enumerated by the Lebesgue checker.
    pub cliques: usize,
    /// Points accepted by the exact solvers.
    pub search_points: usize,
    /// Branch-and-bound nodes before giving up on optimality.
    pub search_nodes: u64,
    /// Width of the lamp support window in lamplighter elements.
    pub lamp_window: i64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            ball_elements: 400_000,
            quotient_index: 100_000,
            target_order: 200_000,
            cliques: 2_000_000,
            search_points: 400,
            search_nodes: 20_000_000,
            lamp_window: 4096,
        }
    }
}

/// Name of the environment variable read by [`Limits::from_env`].
pub const LIMITS_ENV: &str = "BOXDIM_LIMITS";

impl Limits {
    /// Parses `key=value` pairs separated by commas, e.g. `ball=1000,nodes=5000`.
    pub fn parse_overrides(mut self, text: &str) -> Result<Self> {
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("limit override {item:?} is not key=value")))?;
            let n: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("limit {key} has non-integer value {value:?}")))?;
            match key.trim() {
                "ball" => self.ball_elements = n as usize,
                "index" => self.quotient_index = n as usize,
                "target" => self.target_order = n as usize,
                "cliques" => self.cliques = n as usize,
                "points" => self.search_points = n as usize,
                "nodes" => self.search_nodes = n,
                "lamps" => self.lamp_window = n as i64,
                other => return Err(Error::Parse(format!("unknown limit {other:?}"))),
            }
        }
        Ok(self)
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var(LIMITS_ENV) {
            Ok(text) => Limits::default().parse_overrides(&text),
            Err(_) => Ok(Limits::default()),
        }
    }
}
