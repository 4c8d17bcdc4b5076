fn main() {
    std::process::exit(qhecke::cli::run(std::env::args_os()));
}
