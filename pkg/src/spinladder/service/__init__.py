"""HTTP service wrapping the exact-diagonalization package."""
