fn main() {
    std::process::exit(qpf_cli::run(std::env::args()));
}
