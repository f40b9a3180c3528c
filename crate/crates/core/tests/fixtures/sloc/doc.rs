//! Crate docs.

/// Adds one.
pub fn inc(x: i32) -> i32 {
    x + 1 // trailing
}

// SLOC-REGION:kernel
fn kernel() {
    // inside
    let s = "// not comment";
}
// SLOC-END
