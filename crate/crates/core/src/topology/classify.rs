//! Simply connected 5-manifolds with torsion-free `H₂`.

use super::descriptor::{subscript, TopologyError};

/// `k = b₂ + 2g − 1`.
pub fn smale_barden_k(b2: i64, genus: i64) -> i64 {
    b2 + 2 * genus - 1
}

/// Name of the simply connected 5-manifold with `H₂ ≅ Z^k`.
pub fn classify_simply_connected_5(k: i64, spin: bool, torsion: &[u64]) -> Result<String, TopologyError> {
    if k < 1 {
        return Err(TopologyError::Classify(format!("k = {k} < 1")));
    }
    if !torsion.is_empty() {
        return Err(TopologyError::Classify(format!("H₂ has torsion {torsion:?}; outside the classified range")));
    }
    let sum = |n: i64| -> String {
        if n == 1 {
            "S²×S³".to_string()
        } else {
            format!("#{} S²×S³", subscript(n as u64))
        }
    };
    Ok(if spin {
        sum(k)
    } else if k == 1 {
        "S²×̃S³".to_string()
    } else {
        format!("S²×̃S³ # {}", sum(k - 1))
    })
}
