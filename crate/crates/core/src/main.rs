fn main() {
    std::process::exit(apf_ddpg::cli::run(std::env::args_os()));
}
