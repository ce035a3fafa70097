"""I/O-aware last-level cache management on a simulated DDIO/CAT server."""
