fn main() {
    std::process::exit(memsquench::cli::run(std::env::args_os()));
}
