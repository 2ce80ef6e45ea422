use sha2::{Digest, Sha256};

/// Seed of one attempt, a hash of everything that identifies it. Ids are
/// length-prefixed so that no two distinct tuples share a preimage.
pub fn example_seed(master: u64, i_id: &str, j_id: &str, a: u8, b: u8, scenario_index: u32) -> u64 {
    let key = format!(
        "refsynth:{master}:{}:{i_id}:{}:{j_id}:{a}:{b}:{scenario_index}",
        i_id.len(),
        j_id.len()
    );
    hash_u64(&key)
}

/// First eight bytes of the SHA-256 digest, little endian.
pub fn hash_u64(key: &str) -> u64 {
    let digest = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
