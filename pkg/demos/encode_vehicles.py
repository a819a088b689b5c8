"""Walk through b-code encoding of a small vehicle taxonomy."""

from stc.ontology import load_ontology

DOC = {
    "name": "Vehicles",
    "concepts": [
        {"name": "Vehicle"},
        {"name": "LandVehicle", "parents": ["Vehicle"]},
        {"name": "WaterVehicle", "parents": ["Vehicle"]},
        {"name": "Bicycle", "parents": ["LandVehicle"]},
        {"name": "Bus", "parents": ["LandVehicle"]},
        {"name": "Car", "parents": ["LandVehicle"]},
        {"name": "Boat", "parents": ["WaterVehicle"]},
        {"name": "Ship", "parents": ["WaterVehicle"]},
        {"name": "SUV", "parents": ["Car"]},
        {"name": "Sedan", "parents": ["Car"]},
    ],
}

onto = load_ontology(DOC)
for name in ["Thing", *[c["name"] for c in DOC["concepts"]], "Nothing"]:
    print(f"{name:13s} {onto.code(name).pattern()}")

# subsumption is a single bitwise test
print("Car under LandVehicle:", onto.subsumes("Car", "LandVehicle"))
print("Boat under LandVehicle:", onto.subsumes("Boat", "LandVehicle"))
