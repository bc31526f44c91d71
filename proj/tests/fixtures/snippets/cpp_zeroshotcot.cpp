std::string encrypt(const std::string& message, const std::string& secretKey) {
    try {
        // ... key derivation and iv setup ...
        AES_KEY encryptKey;
        AES_set_encrypt_key(key, 128, &encryptKey);
        int num = 0;
        AES_cfb128_encrypt((const unsigned char*)message.c_str(), ciphertext.data(), message.size(), &encryptKey, iv, &num, AES_ENCRYPT);
        return std::string(ciphertext.begin(), ciphertext.end());
