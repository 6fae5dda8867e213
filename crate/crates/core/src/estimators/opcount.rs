//! Thread-local arithmetic-operation tally, compiled only with debug
//! assertions. The shrinkage update paths report how many multiply-class
//! operations they perform so tests can pin their linear complexity.

#[cfg(debug_assertions)]
#[allow(dead_code)]
mod imp {
    use std::cell::Cell;

    thread_local! {
        static COUNT: Cell<u64> = const { Cell::new(0) };
    }

    pub fn reset() {
        COUNT.with(|c| c.set(0));
    }

    pub fn add(n: u64) {
        COUNT.with(|c| c.set(c.get() + n));
    }

    pub fn get() -> u64 {
        COUNT.with(|c| c.get())
    }
}

#[cfg(not(debug_assertions))]
#[allow(dead_code)]
mod imp {
    #[inline(always)]
    pub fn reset() {}
    #[inline(always)]
    pub fn add(_n: u64) {}
    #[inline(always)]
    pub fn get() -> u64 {
        0
    }
}

#[cfg_attr(not(test), allow(unused_imports))]
pub use imp::{add, get, reset};
