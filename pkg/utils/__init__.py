# Utils package: logger
