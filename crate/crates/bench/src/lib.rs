//! Criterion benchmarks for the exhaustive scans in `perron-lattice`; see `benches/`.
