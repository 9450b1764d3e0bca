fn main() {
    std::process::exit(protoalign_cli::run(std::env::args_os()));
}
