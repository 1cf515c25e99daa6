//! Criterion benchmarks for the geometry, enumeration, quadrature and measure kernels.
//! Run them with `cargo bench -p gibbslab-bench`; the library itself is empty.
