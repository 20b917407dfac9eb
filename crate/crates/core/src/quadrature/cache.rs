use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::rules::{Family, QuadratureRule};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Jacobi01(u64, usize),
    Jacobi(u64, u64, usize),
    Laguerre(u64, usize),
    Legendre(usize),
}

impl Key {
    fn new(family: Family, n: usize) -> Self {
        // +0.0 and -0.0 must share an entry
        let bits = |v: f64| (v + 0.0).to_bits();
        match family {
            Family::Jacobi01 { lambda } => Key::Jacobi01(bits(lambda), n),
            Family::Jacobi { alpha, beta } => Key::Jacobi(bits(alpha), bits(beta), n),
            Family::GeneralizedLaguerre { lambda } => Key::Laguerre(bits(lambda), n),
            Family::Legendre => Key::Legendre(n),
        }
    }
}

type Slot = Arc<OnceLock<Result<Arc<QuadratureRule>>>>;

fn table() -> &'static Mutex<HashMap<Key, Slot>> {
    static TABLE: OnceLock<Mutex<HashMap<Key, Slot>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

/// Shared, lazily built rule. Each `(family, n)` is constructed at most once
/// even under concurrent first use; the map lock is released before the
/// (possibly slow) construction runs.
pub fn rule(family: Family, n: usize) -> Result<Arc<QuadratureRule>> {
    let slot = {
        let mut map = table().lock().unwrap_or_else(|e| e.into_inner());
        map.entry(Key::new(family, n)).or_default().clone()
    };
    slot.get_or_init(|| QuadratureRule::new(family, n).map(Arc::new))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_lookup_shares_allocation() {
        let a = rule(Family::Legendre, 17).unwrap();
        let b = rule(Family::Legendre, 17).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn concurrent_first_use_builds_once() {
        let family = Family::Jacobi {
            alpha: 0.123,
            beta: 0.456,
        };
        let rules: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..8)
                .map(|_| s.spawn(move || rule(family, 64).unwrap()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for r in &rules[1..] {
            assert!(Arc::ptr_eq(&rules[0], r));
        }
    }

    #[test]
    fn errors_are_cached_too() {
        assert!(rule(Family::Legendre, 0).is_err());
        assert!(rule(Family::Legendre, 0).is_err());
    }
}
