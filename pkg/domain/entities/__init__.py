"""Domain entities: code specs, enumerators, outer codes, scenarios"""
