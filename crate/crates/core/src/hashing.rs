use sha2::{Digest, Sha256};

/// Hex SHA-256 over the concatenation of `parts`, each length-prefixed.
pub(crate) fn digest_hex<I, B>(parts: I) -> String
where
    I: IntoIterator<Item = B>,
    B: AsRef<[u8]>,
{
    let mut hasher = Sha256::new();
    for part in parts {
        let bytes = part.as_ref();
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// First 16 hex chars of [`digest_hex`]; used to name stage artifacts.
pub(crate) fn short_hash<I, B>(parts: I) -> String
where
    I: IntoIterator<Item = B>,
    B: AsRef<[u8]>,
{
    digest_hex(parts)[..16].to_string()
}
