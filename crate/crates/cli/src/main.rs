fn main() {
    std::process::exit(m2r_cli::run(std::env::args_os()));
}
