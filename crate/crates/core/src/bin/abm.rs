fn main() {
    std::process::exit(abacus_rnn::cli::main());
}
