# Services package: figure_service, simulation_service, validation_service, export_service
