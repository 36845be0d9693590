"""edgevote test suite."""
