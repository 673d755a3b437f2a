fn main() {
    std::process::exit(domainmix::cli::run(std::env::args_os()));
}
