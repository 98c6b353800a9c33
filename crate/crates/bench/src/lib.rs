//! Benchmark harness for the geomsum workspace; see `benches/`.
