//! Process-wide computation limits.
//!
//! Defaults are used unless a front end installs its own limits once at
//! startup (the CLI reads them from `EIGENOP_LAB_BUDGET`).

use std::sync::OnceLock;

use crate::error::{Error, Result};

static INSTALLED: OnceLock<Budget> = OnceLock::new();

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest truncation degree any operation may produce.
    pub max_degree: usize,
    /// Largest iterate index used by schedules and traces.
    pub max_iterate: usize,
    /// Upper bound on `k * M` for the multinomial Leibniz route.
    pub leibniz: usize,
    /// Cap for threshold searches in the lemma harnesses.
    pub search_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_degree: 4096,
            max_iterate: 512,
            leibniz: 64,
            search_cap: 10_000,
        }
    }
}

impl Budget {
    /// Limits currently in force.
    pub fn current() -> Budget {
        INSTALLED.get().copied().unwrap_or_default()
    }

    /// Installs process-wide limits. Only the first call has an effect;
    /// returns false if limits were already installed.
    pub fn install(self) -> bool {
        INSTALLED.set(self).is_ok()
    }

    /// Parses `key=value` pairs separated by commas, starting from the
    /// defaults. A bare integer sets `max_degree`.
    ///
    /// Keys: `max_degree`, `max_iterate`, `leibniz`, `search_cap`.
    pub fn parse(text: &str) -> Result<Budget> {
        let mut budget = Budget::default();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = match part.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => ("max_degree", part),
            };
            let value: usize = value
                .parse()
                .map_err(|_| Error::InvalidInput(format!("budget value `{value}` is not an integer")))?;
            if value == 0 {
                return Err(Error::InvalidInput(format!("budget `{key}` must be positive")));
            }
            match key {
                "max_degree" => budget.max_degree = value,
                "max_iterate" => budget.max_iterate = value,
                "leibniz" => budget.leibniz = value,
                "search_cap" => budget.search_cap = value,
                other => return Err(Error::InvalidInput(format!("unknown budget key `{other}`"))),
            }
        }
        Ok(budget)
    }

    pub(crate) fn check_degree(&self, degree: usize, what: &str) -> Result<()> {
        if degree > self.max_degree {
            return Err(Error::Budget(format!(
                "{what} needs degree {degree}, above the budget of {}",
                self.max_degree
            )));
        }
        Ok(())
    }
}
