fn main() {
    std::process::exit(collapsar::cli::run(std::env::args_os()));
}
