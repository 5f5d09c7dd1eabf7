fn main() {
    std::process::exit(lcmlab::cli::run(std::env::args_os()));
}
