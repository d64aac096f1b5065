fn main() {
    // CLI wiring lands with the evaluation harness.
}
