fn main() {
    std::process::exit(cdiag::run(std::env::args_os()));
}
