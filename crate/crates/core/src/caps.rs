//! Process-wide size caps. Defaults are engineering choices; the CLI overrides them
//! from flags or `AUTREP_CAP_GROUP_ORDER` / `AUTREP_CAP_SUBMODULES`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_GROUP_ORDER: u64 = 1 << 24;
pub const DEFAULT_SUBMODULES: u64 = 20_000;
/// Largest |M|^n materialised as a basis of a tensor power.
pub const DEFAULT_TENSOR: u64 = 1 << 20;

static GROUP_ORDER: AtomicU64 = AtomicU64::new(DEFAULT_GROUP_ORDER);
static SUBMODULES: AtomicU64 = AtomicU64::new(DEFAULT_SUBMODULES);
static TENSOR: AtomicU64 = AtomicU64::new(DEFAULT_TENSOR);

pub fn group_order() -> u64 {
    GROUP_ORDER.load(Ordering::Relaxed)
}

pub fn set_group_order(cap: u64) {
    GROUP_ORDER.store(cap, Ordering::Relaxed);
}

pub fn submodules() -> u64 {
    SUBMODULES.load(Ordering::Relaxed)
}

pub fn set_submodules(cap: u64) {
    SUBMODULES.store(cap, Ordering::Relaxed);
}

pub fn tensor() -> u64 {
    TENSOR.load(Ordering::Relaxed)
}

pub fn set_tensor(cap: u64) {
    TENSOR.store(cap, Ordering::Relaxed);
}

pub(crate) fn check(what: &str, size: u128, cap: u64) -> Result<()> {
    if size > cap as u128 {
        Err(Error::Size { what: what.to_string(), size, cap: cap as u128 })
    } else {
        Ok(())
    }
}
